//! L^q and Bessel-potential Sobolev norms on the torus.
//!
//! `J^s = (I - Delta)^{s/2}` acts per mode as `(1 + |k|^2)^{s/2}`. L^q norms are
//! computed by the rectangle rule with cell weight `(L/N)^2`; for vector
//! fields the components are summed, `(sum_i int |v_i|^q)^{1/q}`, and the
//! sup norm is the sum of component sups.

use crate::error::{Result, VortexError};
use crate::field::{ScalarField, VectorField};
use crate::grid::SpectralGrid;

/// Fields whose norms can be taken: scalars and 2-vectors.
pub trait Field: Clone {
    fn grid(&self) -> &SpectralGrid;
    fn scalar_parts(&self) -> Vec<&ScalarField>;
    fn map_parts(&self, f: impl Fn(&ScalarField) -> ScalarField) -> Self;
}

impl Field for ScalarField {
    fn grid(&self) -> &SpectralGrid {
        ScalarField::grid(self)
    }
    fn scalar_parts(&self) -> Vec<&ScalarField> {
        vec![self]
    }
    fn map_parts(&self, f: impl Fn(&ScalarField) -> ScalarField) -> Self {
        f(self)
    }
}

impl Field for VectorField {
    fn grid(&self) -> &SpectralGrid {
        VectorField::grid(self)
    }
    fn scalar_parts(&self) -> Vec<&ScalarField> {
        vec![self.x(), self.y()]
    }
    fn map_parts(&self, f: impl Fn(&ScalarField) -> ScalarField) -> Self {
        VectorField {
            c1: f(self.x()),
            c2: f(self.y()),
        }
    }
}

fn check_exponent(q: f64) -> Result<()> {
    if q.is_nan() || q < 1.0 {
        return Err(VortexError::InvalidExponent(q));
    }
    Ok(())
}

/// `(1 + |k|^2)^{s/2}` at a flat offset.
#[inline]
pub fn bessel_symbol(grid: &SpectralGrid, offset: usize, s: f64) -> f64 {
    if s == 0.0 {
        return 1.0;
    }
    (1.0 + grid.k_squared(offset)).powf(0.5 * s)
}

/// Applies `J^s` mode by mode.
pub fn bessel_multiplier<F: Field>(field: &F, s: f64) -> F {
    let grid = *field.grid();
    field.map_parts(|p| p.apply_symbol(|o| bessel_symbol(&grid, o, s)))
}

/// Rectangle-rule L^q norm of real point values; `q = inf` is the max.
pub fn lq_norm_values(values: &[f64], cell_area: f64, q: f64) -> Result<f64> {
    check_exponent(q)?;
    Ok(if q.is_infinite() {
        values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    } else {
        (lq_sum(values, q) * cell_area).powf(1.0 / q)
    })
}

fn lq_sum(values: &[f64], q: f64) -> f64 {
    if q == 2.0 {
        values.iter().map(|v| v * v).sum()
    } else if q == 4.0 {
        values.iter().map(|v| (v * v) * (v * v)).sum()
    } else {
        values.iter().map(|v| v.abs().powf(q)).sum()
    }
}

/// L^q norm computed by physical-space quadrature.
pub fn lq_norm<F: Field>(field: &F, q: f64) -> Result<f64> {
    check_exponent(q)?;
    let cell = field.grid().cell_area();
    if q.is_infinite() {
        return Ok(field
            .scalar_parts()
            .iter()
            .map(|p| p.to_physical().iter().fold(0.0f64, |m, v| m.max(v.abs())))
            .sum());
    }
    let total: f64 = field
        .scalar_parts()
        .iter()
        .map(|p| lq_sum(&p.to_physical(), q))
        .sum();
    Ok((total * cell).powf(1.0 / q))
}

/// `||J^s f||_{L^q}`.
pub fn sobolev_norm<F: Field>(field: &F, s: f64, q: f64) -> Result<f64> {
    check_exponent(q)?;
    if s == 0.0 {
        return lq_norm(field, q);
    }
    lq_norm(&bessel_multiplier(field, s), q)
}

/// `(sum_k (1 + |k|^2)^s |c(k)|^2 L^2)^{1/2}`: the q = 2 Sobolev norm via Parseval.
pub fn sobolev_norm_spectral<F: Field>(field: &F, s: f64) -> f64 {
    let grid = *field.grid();
    let sum: f64 = field
        .scalar_parts()
        .iter()
        .map(|p| {
            p.coeffs()
                .iter()
                .enumerate()
                .map(|(o, c)| {
                    let w = if s == 0.0 {
                        1.0
                    } else {
                        (1.0 + grid.k_squared(o)).powf(s)
                    };
                    w * c.norm_sqr()
                })
                .sum::<f64>()
        })
        .sum();
    (sum * grid.area()).sqrt()
}

/// `||grad f||_{L^2}` computed spectrally with the derivative symbol.
pub fn grad_l2<F: Field>(field: &F) -> f64 {
    let grid = *field.grid();
    let sum: f64 = field
        .scalar_parts()
        .iter()
        .map(|p| {
            p.coeffs()
                .iter()
                .enumerate()
                .map(|(o, c)| {
                    let (k1, k2) = grid.derivative_wavevector(o);
                    (k1 * k1 + k2 * k2) * c.norm_sqr()
                })
                .sum::<f64>()
        })
        .sum();
    (sum * grid.area()).sqrt()
}

/// `<f, g>_{L^2}` via Parseval.
pub fn inner_spectral<F: Field>(f: &F, g: &F) -> f64 {
    let area = f.grid().area();
    f.scalar_parts()
        .iter()
        .zip(g.scalar_parts())
        .map(|(a, b)| {
            a.coeffs()
                .iter()
                .zip(b.coeffs())
                .map(|(x, y)| (x * y.conj()).re)
                .sum::<f64>()
        })
        .sum::<f64>()
        * area
}

/// `int f g dx` by quadrature of point values.
pub fn inner_physical(f: &[f64], g: &[f64], cell_area: f64) -> f64 {
    f.iter().zip(g).map(|(a, b)| a * b).sum::<f64>() * cell_area
}

//! Differential and bilinear operators of the velocity/vorticity system.
//!
//! Nonlinear terms are evaluated pseudo-spectrally: inputs are dealiased,
//! derivatives taken spectrally, products formed at the grid points, and
//! the result transformed back and dealiased.

use num_complex::Complex64;

use crate::error::{Result, VortexError};
use crate::field::{ScalarField, VectorField};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Relative size of `xi(0)` above which Biot-Savart refuses the input.
pub const MEAN_TOLERANCE: f64 = 1e-12;

/// `d f / d x_axis` (axis 0 or 1).
pub fn partial(f: &ScalarField, axis: usize) -> ScalarField {
    let grid = *f.grid();
    let n = grid.n();
    let mut out = f.clone();
    for (o, c) in out.coeffs_mut().iter_mut().enumerate() {
        let k = if axis == 0 {
            grid.derivative_wavenumber(o / n)
        } else {
            grid.derivative_wavenumber(o % n)
        };
        *c *= I * k;
    }
    out
}

pub fn gradient(f: &ScalarField) -> VectorField {
    VectorField {
        c1: partial(f, 0),
        c2: partial(f, 1),
    }
}

pub fn divergence(v: &VectorField) -> ScalarField {
    &partial(v.x(), 0) + &partial(v.y(), 1)
}

/// Scalar curl `xi = -d2 v1 + d1 v2`.
pub fn curl(v: &VectorField) -> ScalarField {
    let grid = *v.grid();
    let mut out = ScalarField::zeros(grid);
    let (a, b) = (v.x().coeffs(), v.y().coeffs());
    for (o, c) in out.coeffs_mut().iter_mut().enumerate() {
        let (k1, k2) = grid.derivative_wavevector(o);
        *c = I * (b[o] * k1 - a[o] * k2);
    }
    out
}

/// Velocity with vorticity `xi`: `v(k) = -i k_perp xi(k) / |k|^2`,
/// `k_perp = (-k2, k1)`, `v(0) = 0`. Output is divergence-free by construction.
pub fn biot_savart(xi: &ScalarField) -> Result<VectorField> {
    let mean = xi.coeffs()[0].norm();
    if mean > MEAN_TOLERANCE * xi.max_abs() {
        return Err(VortexError::NonzeroMean(xi.mean()));
    }
    let grid = *xi.grid();
    let mut v1 = ScalarField::zeros(grid);
    let mut v2 = ScalarField::zeros(grid);
    {
        let (c1, c2) = (v1.coeffs_mut(), v2.coeffs_mut());
        for (o, x) in xi.coeffs().iter().enumerate() {
            let (k1, k2) = grid.derivative_wavevector(o);
            let k2sum = k1 * k1 + k2 * k2;
            if k2sum == 0.0 {
                continue;
            }
            c1[o] = I * x * (k2 / k2sum);
            c2[o] = -I * x * (k1 / k2sum);
        }
    }
    Ok(VectorField { c1: v1, c2: v2 })
}

/// Orthogonal projection onto divergence-free fields; `k = 0` untouched.
pub fn leray_project(u: &VectorField) -> VectorField {
    let grid = *u.grid();
    let mut out = u.clone();
    let (a, b) = (u.x().coeffs(), u.y().coeffs());
    for o in 0..grid.len() {
        let (k1, k2) = grid.derivative_wavevector(o);
        let k2sum = k1 * k1 + k2 * k2;
        if k2sum == 0.0 {
            continue;
        }
        let dot = (a[o] * k1 + b[o] * k2) / k2sum;
        out.c1.coeffs_mut()[o] = a[o] - dot * k1;
        out.c2.coeffs_mut()[o] = b[o] - dot * k2;
    }
    out
}

/// Physical samples of a dealiased advecting velocity, reused across
/// several transport products in one time step.
pub(crate) struct Advector {
    grid: crate::grid::SpectralGrid,
    u1: Vec<f64>,
    u2: Vec<f64>,
}

impl Advector {
    pub(crate) fn new(u: &VectorField) -> Self {
        let [u1, u2] = u.dealias().to_physical();
        Self {
            grid: *u.grid(),
            u1,
            u2,
        }
    }

    /// `u . grad f` at the grid points, `f` dealiased first.
    pub(crate) fn pointwise(&self, f: &ScalarField) -> Vec<f64> {
        let f = f.dealias();
        let d1 = partial(&f, 0).to_physical();
        let d2 = partial(&f, 1).to_physical();
        (0..self.u1.len())
            .map(|p| self.u1[p] * d1[p] + self.u2[p] * d2[p])
            .collect()
    }

    /// Dealiased `u . grad f`.
    pub(crate) fn transport(&self, f: &ScalarField) -> ScalarField {
        let mut out = ScalarField::from_physical(self.grid, &self.pointwise(f)).expect("sized by grid");
        out.dealias_in_place();
        out
    }
}

/// `(u . grad) v` at the grid points, from dealiased inputs, before the
/// final transform. Used for brackets against non-band-limited weights.
pub fn bilinear_b_pointwise(u: &VectorField, v: &VectorField) -> Result<[Vec<f64>; 2]> {
    u.grid().check_same(v.grid())?;
    let adv = Advector::new(u);
    Ok([adv.pointwise(v.x()), adv.pointwise(v.y())])
}

/// `B(u, v) = (u . grad) v`, dealiased; not Leray-projected.
pub fn bilinear_b(u: &VectorField, v: &VectorField) -> Result<VectorField> {
    let grid = *u.grid();
    let [p1, p2] = bilinear_b_pointwise(u, v)?;
    let mut c1 = ScalarField::from_physical(grid, &p1)?;
    let mut c2 = ScalarField::from_physical(grid, &p2)?;
    c1.dealias_in_place();
    c2.dealias_in_place();
    Ok(VectorField { c1, c2 })
}

/// `u . grad xi` at the grid points from dealiased inputs.
pub fn bilinear_f_pointwise(u: &VectorField, xi: &ScalarField) -> Result<Vec<f64>> {
    u.grid().check_same(xi.grid())?;
    Ok(Advector::new(u).pointwise(xi))
}

/// `F(u, xi) = u . grad xi`, dealiased.
pub fn bilinear_f(u: &VectorField, xi: &ScalarField) -> Result<ScalarField> {
    let values = bilinear_f_pointwise(u, xi)?;
    let mut out = ScalarField::from_physical(*u.grid(), &values)?;
    out.dealias_in_place();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::SpectralGrid;
    use crate::norms::{inner_spectral, lq_norm};
    use crate::random::{random_scalar, random_vector, random_velocity};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn g() -> SpectralGrid {
        SpectralGrid::new(32, 2.0 * PI).unwrap()
    }

    fn max_diff(a: &ScalarField, b: &ScalarField) -> f64 {
        a.to_physical()
            .iter()
            .zip(b.to_physical())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn curl_of_shear_is_cosine() {
        let v = VectorField::from_fn(g(), |_, _| 0.0, |x1, _| x1.sin());
        let xi = curl(&v);
        let expected = ScalarField::from_fn(g(), |x1, _| x1.cos());
        assert!(max_diff(&xi, &expected) < 1e-13);
        assert!(xi.hermitian_defect() < 1e-13);
    }

    #[test]
    fn curl_kills_constants_and_gradients() {
        let c = VectorField::from_fn(g(), |_, _| 1.5, |_, _| -0.25);
        assert!(curl(&c).max_abs() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let phi = random_scalar(&g(), &mut rng, 1.0);
        let grad = gradient(&phi);
        assert!(curl(&grad).max_abs() < 1e-13 * grad.x().max_abs());
    }

    #[test]
    fn biot_savart_single_mode() {
        let xi = ScalarField::from_fn(g(), |x1, _| x1.cos());
        let v = biot_savart(&xi).unwrap();
        let expected = VectorField::from_fn(g(), |_, _| 0.0, |x1, _| x1.sin());
        assert!(max_diff(v.x(), expected.x()) < 1e-12);
        assert!(max_diff(v.y(), expected.y()) < 1e-12);
        let zero = biot_savart(&ScalarField::zeros(g())).unwrap();
        assert_eq!(zero, VectorField::zeros(g()));
    }

    #[test]
    fn biot_savart_rejects_mean() {
        let xi = ScalarField::from_fn(g(), |x1, _| 0.3 + x1.cos());
        assert!(matches!(biot_savart(&xi), Err(VortexError::NonzeroMean(_))));
    }

    #[test]
    fn leray_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = random_velocity(&g(), &mut rng, 1.0);
        let p = leray_project(&u);
        assert!((&p - &u).x().max_abs() < 1e-13 && (&p - &u).y().max_abs() < 1e-13);

        let phi = random_scalar(&g(), &mut rng, 1.0);
        let grad = gradient(&phi);
        let pg = leray_project(&grad);
        assert!(pg.x().max_abs() < 1e-13 * grad.x().max_abs());
        assert!(pg.y().max_abs() < 1e-13 * grad.y().max_abs());

        let w = random_vector(&g(), &mut rng, 1.0);
        let once = leray_project(&w);
        let twice = leray_project(&once);
        assert!((&once - &twice).x().max_abs() < 1e-15);
        assert!(once.divergence_defect() < 1e-13);
    }

    #[test]
    fn shear_self_advection_vanishes() {
        let u = VectorField::from_fn(g(), |_, _| 0.0, |x1, _| x1.sin());
        let b = bilinear_b(&u, &u).unwrap();
        assert!(b.x().max_abs() < 1e-14 && b.y().max_abs() < 1e-14);
        let zero = VectorField::zeros(g());
        assert_eq!(bilinear_b(&zero, &zero).unwrap(), zero);
    }

    #[test]
    fn f_examples() {
        let u = VectorField::from_fn(g(), |_, _| 0.0, |x1, _| x1.sin());
        let xi = ScalarField::from_fn(g(), |_, x2| x2.cos());
        let f = bilinear_f(&u, &xi).unwrap();
        let expected = ScalarField::from_fn(g(), |x1, x2| -x1.sin() * x2.sin());
        assert!(max_diff(&f, &expected) < 1e-13);
        let c = ScalarField::constant(g(), 2.0);
        assert!(bilinear_f(&u, &c).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn b_skew_symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let u = random_velocity(&g(), &mut rng, 1.0);
            let v = random_vector(&g(), &mut rng, 1.0);
            let z = random_vector(&g(), &mut rng, 1.0);
            let lhs = inner_spectral(&bilinear_b(&u, &v).unwrap(), &z);
            let rhs = -inner_spectral(&bilinear_b(&u, &z).unwrap(), &v);
            assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(1.0), "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn grid_mismatch_is_an_error() {
        let other = SpectralGrid::new(16, 2.0 * PI).unwrap();
        let u = VectorField::zeros(g());
        assert!(bilinear_b(&u, &VectorField::zeros(other)).is_err());
        assert!(bilinear_f(&u, &ScalarField::zeros(other)).is_err());
        let _ = lq_norm(&u, 2.0).unwrap();
    }
}

//! Fourier-coefficient representation of scalar and vector fields.
//!
//! Coefficients are mode amplitudes: `u(x) = sum_k c(k) exp(i k.x)`, so a
//! constant field `c` has `c(0) = c`.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Result, VortexError};
use crate::grid::SpectralGrid;
use crate::transform;

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: SpectralGrid,
    coeffs: Vec<Complex64>,
}

impl ScalarField {
    pub fn zeros(grid: SpectralGrid) -> Self {
        Self {
            coeffs: vec![Complex64::default(); grid.len()],
            grid,
        }
    }

    pub fn constant(grid: SpectralGrid, value: f64) -> Self {
        let mut f = Self::zeros(grid);
        f.coeffs[0] = Complex64::new(value, 0.0);
        f
    }

    pub fn from_coeffs(grid: SpectralGrid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(VortexError::DimensionMismatch {
                expected: grid.len(),
                found: coeffs.len(),
            });
        }
        Ok(Self { grid, coeffs })
    }

    /// Forward transform of real point values (row-major over `(x1, x2)`).
    pub fn from_physical(grid: SpectralGrid, values: &[f64]) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(VortexError::DimensionMismatch {
                expected: grid.len(),
                found: values.len(),
            });
        }
        let mut coeffs: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        transform::forward_2d(&mut coeffs, grid.n());
        Ok(Self { grid, coeffs })
    }

    /// Build from a function sampled at the grid points.
    pub fn from_fn(grid: SpectralGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        let n = grid.n();
        let h = grid.length() / n as f64;
        let values: Vec<f64> = (0..grid.len())
            .map(|o| f((o / n) as f64 * h, (o % n) as f64 * h))
            .collect();
        Self::from_physical(grid, &values).expect("sized by grid")
    }

    /// Point values on the `N x N` grid.
    pub fn to_physical(&self) -> Vec<f64> {
        let mut data = self.coeffs.clone();
        transform::inverse_2d(&mut data, self.grid.n());
        data.into_iter().map(|c| c.re).collect()
    }

    #[inline]
    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    #[inline]
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    #[inline]
    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn mode(&self, j1: i64, j2: i64) -> Option<Complex64> {
        self.grid.mode_offset(j1, j2).map(|o| self.coeffs[o])
    }

    /// Sets `c` at `(j1, j2)` and its conjugate at `(-j1, -j2)`.
    pub fn set_real_mode(&mut self, j1: i64, j2: i64, c: Complex64) -> Result<()> {
        let o = self
            .grid
            .mode_offset(j1, j2)
            .ok_or(VortexError::ModeOutOfBand(j1, j2))?;
        let co = self.grid.conjugate_offset(o);
        if co == o {
            self.coeffs[o] = Complex64::new(c.re, 0.0);
        } else {
            self.coeffs[o] = c;
            self.coeffs[co] = c.conj();
        }
        Ok(())
    }

    /// Spatial mean (the `k = 0` amplitude).
    #[inline]
    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    /// `max |c(k) - conj c(-k)| / max |c|`; zero for an exactly real field.
    pub fn hermitian_defect(&self) -> f64 {
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let defect = (0..self.coeffs.len())
            .map(|o| (self.coeffs[o] - self.coeffs[self.grid.conjugate_offset(o)].conj()).norm())
            .fold(0.0, f64::max);
        defect / scale
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Zeroes every mode outside the dealiasing mask.
    pub fn dealias(&self) -> Self {
        let mut out = self.clone();
        out.dealias_in_place();
        out
    }

    pub fn dealias_in_place(&mut self) {
        let grid = self.grid;
        for (o, c) in self.coeffs.iter_mut().enumerate() {
            if !grid.in_mask(o) {
                *c = Complex64::default();
            }
        }
    }

    pub fn is_dealiased(&self) -> bool {
        self.coeffs
            .iter()
            .enumerate()
            .all(|(o, c)| self.grid.in_mask(o) || *c == Complex64::default())
    }

    /// Multiply each mode by a real symbol evaluated at its offset.
    pub fn apply_symbol(&self, symbol: impl Fn(usize) -> f64) -> Self {
        let mut out = self.clone();
        for (o, c) in out.coeffs.iter_mut().enumerate() {
            *c *= symbol(o);
        }
        out
    }

    pub fn scale(&self, a: f64) -> Self {
        self.apply_symbol(|_| a)
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: f64, other: &ScalarField) -> Result<()> {
        self.grid.check_same(&other.grid)?;
        for (x, y) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *x += y * a;
        }
        Ok(())
    }

    pub fn check_grid(&self, grid: &SpectralGrid) -> Result<()> {
        self.grid.check_same(grid)
    }

    /// Copies the modes `|j| < N/2` onto a finer grid of the same length.
    /// Nyquist modes are dropped.
    pub fn embed(&self, grid: SpectralGrid) -> Result<Self> {
        if grid.n() < self.grid.n() || grid.length() != self.grid.length() {
            return Err(VortexError::GridMismatch {
                expected: self.grid.n(),
                expected_len: self.grid.length(),
                found: grid.n(),
                found_len: grid.length(),
            });
        }
        let mut out = Self::zeros(grid);
        let n = self.grid.n();
        for (o, c) in self.coeffs.iter().enumerate() {
            if self.grid.is_nyquist(o / n) || self.grid.is_nyquist(o % n) {
                continue;
            }
            let j1 = self.grid.index_to_j(o / n);
            let j2 = self.grid.index_to_j(o % n);
            let t = grid.mode_offset(j1, j2).expect("finer grid holds the band");
            out.coeffs[t] = *c;
        }
        Ok(out)
    }
}

impl Add for &ScalarField {
    type Output = ScalarField;
    fn add(self, rhs: &ScalarField) -> ScalarField {
        assert_eq!(self.grid.n(), rhs.grid.n(), "grid mismatch");
        let coeffs = self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect();
        ScalarField { grid: self.grid, coeffs }
    }
}

impl Sub for &ScalarField {
    type Output = ScalarField;
    fn sub(self, rhs: &ScalarField) -> ScalarField {
        assert_eq!(self.grid.n(), rhs.grid.n(), "grid mismatch");
        let coeffs = self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect();
        ScalarField { grid: self.grid, coeffs }
    }
}

impl Mul<f64> for &ScalarField {
    type Output = ScalarField;
    fn mul(self, rhs: f64) -> ScalarField {
        self.scale(rhs)
    }
}

impl Neg for &ScalarField {
    type Output = ScalarField;
    fn neg(self) -> ScalarField {
        self.scale(-1.0)
    }
}

/// A 2D vector field `(v1, v2)` on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub(crate) c1: ScalarField,
    pub(crate) c2: ScalarField,
}

impl VectorField {
    pub fn new(c1: ScalarField, c2: ScalarField) -> Result<Self> {
        c1.grid.check_same(&c2.grid)?;
        Ok(Self { c1, c2 })
    }

    pub fn zeros(grid: SpectralGrid) -> Self {
        Self {
            c1: ScalarField::zeros(grid),
            c2: ScalarField::zeros(grid),
        }
    }

    pub fn from_fn(
        grid: SpectralGrid,
        f1: impl Fn(f64, f64) -> f64,
        f2: impl Fn(f64, f64) -> f64,
    ) -> Self {
        Self {
            c1: ScalarField::from_fn(grid, f1),
            c2: ScalarField::from_fn(grid, f2),
        }
    }

    #[inline]
    pub fn grid(&self) -> &SpectralGrid {
        self.c1.grid()
    }

    #[inline]
    pub fn x(&self) -> &ScalarField {
        &self.c1
    }

    #[inline]
    pub fn y(&self) -> &ScalarField {
        &self.c2
    }

    pub fn components(&self) -> [&ScalarField; 2] {
        [&self.c1, &self.c2]
    }

    pub fn into_components(self) -> (ScalarField, ScalarField) {
        (self.c1, self.c2)
    }

    pub fn to_physical(&self) -> [Vec<f64>; 2] {
        [self.c1.to_physical(), self.c2.to_physical()]
    }

    /// `max_k |k . v(k)| / max_k |v(k)|` using the derivative symbol.
    pub fn divergence_defect(&self) -> f64 {
        let grid = *self.grid();
        let scale = self.c1.max_abs().max(self.c2.max_abs());
        if scale == 0.0 {
            return 0.0;
        }
        let worst = (0..grid.len())
            .map(|o| {
                let (k1, k2) = grid.derivative_wavevector(o);
                (self.c1.coeffs[o] * k1 + self.c2.coeffs[o] * k2).norm()
            })
            .fold(0.0, f64::max);
        worst / scale
    }

    pub fn hermitian_defect(&self) -> f64 {
        self.c1.hermitian_defect().max(self.c2.hermitian_defect())
    }

    pub fn dealias(&self) -> Self {
        Self {
            c1: self.c1.dealias(),
            c2: self.c2.dealias(),
        }
    }

    pub fn apply_symbol(&self, symbol: impl Fn(usize) -> f64) -> Self {
        Self {
            c1: self.c1.apply_symbol(&symbol),
            c2: self.c2.apply_symbol(&symbol),
        }
    }

    pub fn scale(&self, a: f64) -> Self {
        self.apply_symbol(|_| a)
    }

    pub fn embed(&self, grid: SpectralGrid) -> Result<Self> {
        Ok(Self {
            c1: self.c1.embed(grid)?,
            c2: self.c2.embed(grid)?,
        })
    }

    pub fn axpy(&mut self, a: f64, other: &VectorField) -> Result<()> {
        self.c1.axpy(a, &other.c1)?;
        self.c2.axpy(a, &other.c2)
    }
}

impl Add for &VectorField {
    type Output = VectorField;
    fn add(self, rhs: &VectorField) -> VectorField {
        VectorField {
            c1: &self.c1 + &rhs.c1,
            c2: &self.c2 + &rhs.c2,
        }
    }
}

impl Sub for &VectorField {
    type Output = VectorField;
    fn sub(self, rhs: &VectorField) -> VectorField {
        VectorField {
            c1: &self.c1 - &rhs.c1,
            c2: &self.c2 - &rhs.c2,
        }
    }
}

impl Mul<f64> for &VectorField {
    type Output = VectorField;
    fn mul(self, rhs: f64) -> VectorField {
        self.scale(rhs)
    }
}

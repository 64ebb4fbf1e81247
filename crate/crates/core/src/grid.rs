//! Periodic torus discretization and wavevector bookkeeping.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Result, VortexError};

pub const DEFAULT_DEALIAS: f64 = 2.0 / 3.0;

/// An `N x N` Fourier grid on the torus `[0, L)^2`.
///
/// Mode storage is row-major over `(i1, i2)` with `i = j mod N` and
/// `j in {-N/2+1, ..., N/2}`. Physical samples sit at `x = (i1, i2) * L / N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralGrid {
    n: usize,
    length: f64,
    dealias_fraction: f64,
}

impl SpectralGrid {
    pub fn new(n: usize, length: f64) -> Result<Self> {
        Self::with_dealias(n, length, DEFAULT_DEALIAS)
    }

    pub fn with_dealias(n: usize, length: f64, dealias_fraction: f64) -> Result<Self> {
        if n < 8 || !n.is_multiple_of(2) {
            return Err(VortexError::InvalidGrid(format!(
                "modes_per_dim must be even and >= 8, got {n}"
            )));
        }
        if n > u16::MAX as usize {
            return Err(VortexError::InvalidGrid(format!("modes_per_dim {n} too large")));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(VortexError::InvalidGrid(format!(
                "domain_length must be positive, got {length}"
            )));
        }
        if !(dealias_fraction > 0.0 && dealias_fraction <= 1.0) {
            return Err(VortexError::InvalidGrid(format!(
                "dealias_fraction must lie in (0, 1], got {dealias_fraction}"
            )));
        }
        Ok(Self {
            n,
            length,
            dealias_fraction,
        })
    }

    /// Default torus: `L = 2 pi`, `N = 64`.
    pub fn standard() -> Self {
        Self::new(64, 2.0 * PI).expect("valid default grid")
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn length(&self) -> f64 {
        self.length
    }

    #[inline]
    pub fn dealias_fraction(&self) -> f64 {
        self.dealias_fraction
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Quadrature weight of one cell, `(L/N)^2`.
    #[inline]
    pub fn cell_area(&self) -> f64 {
        let h = self.length / self.n as f64;
        h * h
    }

    #[inline]
    pub fn area(&self) -> f64 {
        self.length * self.length
    }

    /// Fundamental wavenumber `2 pi / L`.
    #[inline]
    pub fn k0(&self) -> f64 {
        2.0 * PI / self.length
    }

    /// Signed integer index of storage slot `i`.
    #[inline]
    pub fn index_to_j(&self, i: usize) -> i64 {
        if i <= self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    /// Storage slot of signed index `j`, if it lies in the band.
    #[inline]
    pub fn j_to_index(&self, j: i64) -> Option<usize> {
        let half = (self.n / 2) as i64;
        if j > half || j <= -half {
            return None;
        }
        Some(if j >= 0 { j as usize } else { (j + self.n as i64) as usize })
    }

    /// Flat storage offset of mode `(j1, j2)`.
    pub fn mode_offset(&self, j1: i64, j2: i64) -> Option<usize> {
        Some(self.j_to_index(j1)? * self.n + self.j_to_index(j2)?)
    }

    /// Flat offset of the mode `-k` given the offset of `k`.
    #[inline]
    pub fn conjugate_offset(&self, offset: usize) -> usize {
        let (i1, i2) = (offset / self.n, offset % self.n);
        ((self.n - i1) % self.n) * self.n + (self.n - i2) % self.n
    }

    #[inline]
    pub fn is_nyquist(&self, i: usize) -> bool {
        i == self.n / 2
    }

    /// Wavenumber along one axis.
    #[inline]
    pub fn wavenumber(&self, i: usize) -> f64 {
        self.k0() * self.index_to_j(i) as f64
    }

    /// Symbol used for first derivatives: the true wavenumber, except zero
    /// on the Nyquist slot so derivatives of real fields stay real.
    #[inline]
    pub fn derivative_wavenumber(&self, i: usize) -> f64 {
        if self.is_nyquist(i) {
            0.0
        } else {
            self.wavenumber(i)
        }
    }

    /// `(k1, k2)` at a flat offset.
    #[inline]
    pub fn wavevector(&self, offset: usize) -> (f64, f64) {
        (
            self.wavenumber(offset / self.n),
            self.wavenumber(offset % self.n),
        )
    }

    #[inline]
    pub fn derivative_wavevector(&self, offset: usize) -> (f64, f64) {
        (
            self.derivative_wavenumber(offset / self.n),
            self.derivative_wavenumber(offset % self.n),
        )
    }

    /// `|k|^2` at a flat offset (true wavevector).
    #[inline]
    pub fn k_squared(&self, offset: usize) -> f64 {
        let (k1, k2) = self.wavevector(offset);
        k1 * k1 + k2 * k2
    }

    /// Largest retained `|j|` along an axis after dealiasing.
    #[inline]
    pub fn dealias_cutoff(&self) -> f64 {
        self.dealias_fraction * (self.n / 2) as f64
    }

    #[inline]
    pub fn in_mask(&self, offset: usize) -> bool {
        let j1 = self.index_to_j(offset / self.n).abs();
        let j2 = self.index_to_j(offset % self.n).abs();
        (j1.max(j2) as f64) <= self.dealias_cutoff()
    }

    /// Iterator over `(offset, j1, j2)` for every stored mode.
    pub fn modes(&self) -> impl Iterator<Item = (usize, i64, i64)> + '_ {
        (0..self.len()).map(move |o| {
            (
                o,
                self.index_to_j(o / self.n),
                self.index_to_j(o % self.n),
            )
        })
    }

    pub(crate) fn check_same(&self, other: &SpectralGrid) -> Result<()> {
        if self.n != other.n || self.length != other.length {
            return Err(VortexError::GridMismatch {
                expected: self.n,
                expected_len: self.length,
                found: other.n,
                found_len: other.length,
            });
        }
        Ok(())
    }
}

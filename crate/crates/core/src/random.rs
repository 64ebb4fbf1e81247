//! Random test fields with `|k|^{-2}` amplitude decay and random phases.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

use crate::field::{ScalarField, VectorField};
use crate::grid::SpectralGrid;
use crate::norms;
use crate::ops;

/// Real, mean-zero, dealiased scalar field with amplitude `~ |j|^{-2}`,
/// rescaled to the given L^2 norm.
pub fn random_scalar<R: Rng + ?Sized>(grid: &SpectralGrid, rng: &mut R, l2: f64) -> ScalarField {
    let mut f = ScalarField::zeros(*grid);
    let n = grid.n();
    for o in 0..grid.len() {
        let c = grid.conjugate_offset(o);
        if c <= o || !grid.in_mask(o) {
            continue;
        }
        let j1 = grid.index_to_j(o / n) as f64;
        let j2 = grid.index_to_j(o % n) as f64;
        let amp = 1.0 / (j1 * j1 + j2 * j2);
        let phase = rng.random::<f64>() * 2.0 * PI;
        let mag = amp * (0.5 + rng.random::<f64>());
        let z = Complex64::from_polar(mag, phase);
        f.coeffs_mut()[o] = z;
        f.coeffs_mut()[c] = z.conj();
    }
    let norm = norms::sobolev_norm_spectral(&f, 0.0);
    if norm > 0.0 {
        f = f.scale(l2 / norm);
    }
    f
}

/// Divergence-free, mean-zero, dealiased velocity: Biot-Savart of a random
/// vorticity, rescaled to the given L^2 norm.
pub fn random_velocity<R: Rng + ?Sized>(grid: &SpectralGrid, rng: &mut R, l2: f64) -> VectorField {
    let xi = random_scalar(grid, rng, 1.0);
    let v = ops::biot_savart(&xi).expect("mean-zero by construction");
    let norm = norms::sobolev_norm_spectral(&v, 0.0);
    v.scale(l2 / norm)
}

/// Arbitrary real vector field (not divergence-free), dealiased.
pub fn random_vector<R: Rng + ?Sized>(grid: &SpectralGrid, rng: &mut R, l2: f64) -> VectorField {
    let a = random_scalar(grid, rng, l2 / 2f64.sqrt());
    let b = random_scalar(grid, rng, l2 / 2f64.sqrt());
    VectorField::new(a, b).expect("same grid")
}

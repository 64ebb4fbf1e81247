//! Pseudo-spectral simulator and estimate-checking harness for the 2D
//! stochastic Navier-Stokes equations in velocity and vorticity form.

pub mod error;
pub mod estimates;
pub mod field;
pub mod grid;
pub mod norms;
pub mod ops;
pub mod noise;
pub mod random;
pub mod snapshot;
pub mod stats;
pub mod integrator;
mod transform;

#[cfg(feature = "cli")]
pub mod cli;
#[cfg(feature = "cli")]
pub mod config;
#[cfg(feature = "cli")]
pub mod output;

pub use error::{Result, VortexError};
pub use field::{ScalarField, VectorField};
pub use grid::SpectralGrid;

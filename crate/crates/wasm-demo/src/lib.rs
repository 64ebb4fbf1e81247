//! Browser bindings: a live stochastic vorticity simulation, Biot-Savart
//! velocity reconstruction and Hille-Yosida smoothing of a field.
//!
//! Physical arrays are row-major `N*N` with value `(i1, i2)` at `i1 N + i2`.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vortex::integrator::{CoupledState, SolverConfig, Stepper};
use vortex::noise::{hille_yosida, sample_increment, CovarianceSpec, HyLevel, NoiseStream, SigmaKind};
use vortex::random::random_scalar;
use vortex::{norms, ops, ScalarField, SpectralGrid};
use wasm_bindgen::prelude::*;

type Res<T> = std::result::Result<T, String>;

const LENGTH: f64 = 2.0 * PI;

fn grid(n: usize) -> Res<SpectralGrid> {
    SpectralGrid::new(n, LENGTH).map_err(|e| e.to_string())
}

fn field(n: usize, values: &[f64]) -> Res<ScalarField> {
    ScalarField::from_physical(grid(n)?, values).map_err(|e| e.to_string())
}

/// Simulation state behind [`Simulation`].
pub struct Demo {
    stepper: Stepper,
    spec: CovarianceSpec,
    stream: NoiseStream,
    state: CoupledState,
    steps: u64,
}

impl Demo {
    /// Random initial vorticity of unit L^2 norm; `amplitude` scales the
    /// noise coefficients, `multiplicative` selects the bounded
    /// `<v,h>^2/(1+<v,h>^2)` intensity instead of a constant one.
    pub fn create(n: usize, seed: u64, amplitude: f64, dt: f64, multiplicative: bool) -> Res<Self> {
        let g = grid(n)?;
        let cfg = SolverConfig::new(dt, dt).map_err(|e| e.to_string())?;
        let sigma = if multiplicative { SigmaKind::RationalSquare } else { SigmaKind::ConstantOne };
        let spec = CovarianceSpec::power_law(&g, 4, amplitude, 1.1).with_sigma(sigma);
        spec.validate(&g).map_err(|e| e.to_string())?;
        let xi0 = random_scalar(&g, &mut ChaCha8Rng::seed_from_u64(seed), 1.0);
        let state = CoupledState::from_vorticity(xi0).map_err(|e| e.to_string())?;
        Ok(Self {
            stepper: Stepper::new(g, &cfg),
            spec,
            stream: NoiseStream::new(seed, 0),
            state,
            steps: 0,
        })
    }

    pub fn advance(&mut self, count: u32) -> Res<()> {
        for _ in 0..count {
            let dw = sample_increment(&self.stream, self.steps, &self.spec, self.stepper.dt()).map_err(|e| e.to_string())?;
            self.state = self.stepper.step(&self.state, &dw, &self.spec).map_err(|e| e.to_string())?;
            self.steps += 1;
        }
        Ok(())
    }

    /// `xi`, `zeta` (noise part) or `beta` (remainder) in physical space.
    pub fn field(&self, name: &str) -> Res<Vec<f64>> {
        let f = match name {
            "xi" => &self.state.xi,
            "zeta" => &self.state.zeta,
            "beta" => &self.state.beta,
            other => return Err(format!("unknown field {other:?}")),
        };
        Ok(f.to_physical())
    }

    pub fn time(&self) -> f64 {
        self.state.t
    }

    /// `||v||^2_{L^2}`.
    pub fn energy(&self) -> f64 {
        norms::lq_norm(&self.state.v, 2.0).map(|x| x * x).unwrap_or(f64::NAN)
    }

    /// `||xi||^2_{L^2}`.
    pub fn enstrophy(&self) -> f64 {
        norms::lq_norm(&self.state.xi, 2.0).map(|x| x * x).unwrap_or(f64::NAN)
    }
}

/// Velocity `[v1..., v2...]` of a mean-zero vorticity on the `2 pi` torus.
pub fn velocity_values(n: usize, vorticity: &[f64]) -> Res<Vec<f64>> {
    let xi = field(n, vorticity)?;
    let v = ops::biot_savart(&xi).map_err(|e| e.to_string())?;
    let [mut a, b] = v.to_physical();
    a.extend(b);
    Ok(a)
}

/// Applies `R_level = level (level - Laplacian)^{-1}`; `level = 0` is the identity.
pub fn smoothed_values(n: usize, values: &[f64], level: u32) -> Res<Vec<f64>> {
    let f = field(n, values)?;
    let level = if level == 0 {
        HyLevel::Infinite
    } else {
        HyLevel::finite(level as i64).map_err(|e| e.to_string())?
    };
    Ok(hille_yosida(&f, level).to_physical())
}

#[wasm_bindgen]
pub struct Simulation(Demo);

#[wasm_bindgen]
impl Simulation {
    #[wasm_bindgen(constructor)]
    pub fn new(n: usize, seed: u32, amplitude: f64, dt: f64, multiplicative: bool) -> Result<Simulation, JsError> {
        Demo::create(n, seed as u64, amplitude, dt, multiplicative)
            .map(Simulation)
            .map_err(|e| JsError::new(&e))
    }

    pub fn step(&mut self, count: u32) -> Result<(), JsError> {
        self.0.advance(count).map_err(|e| JsError::new(&e))
    }

    pub fn field(&self, name: &str) -> Result<Vec<f64>, JsError> {
        self.0.field(name).map_err(|e| JsError::new(&e))
    }

    pub fn time(&self) -> f64 {
        self.0.time()
    }

    pub fn energy(&self) -> f64 {
        self.0.energy()
    }

    pub fn enstrophy(&self) -> f64 {
        self.0.enstrophy()
    }
}

#[wasm_bindgen]
pub fn velocity(n: usize, vorticity: &[f64]) -> Result<Vec<f64>, JsError> {
    velocity_values(n, vorticity).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn smooth(n: usize, values: &[f64], level: u32) -> Result<Vec<f64>, JsError> {
    smoothed_values(n, values, level).map_err(|e| JsError::new(&e))
}

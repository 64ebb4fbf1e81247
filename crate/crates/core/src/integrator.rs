//! Exponential (integrating-factor) Euler-Maruyama stepping of the coupled
//! velocity / vorticity / Ornstein-Uhlenbeck / remainder system.
//!
//! Per mode, with `E = exp(-|k|^2 dt)` (viscosity 1):
//!
//! ```text
//! v+    = E [v    - dt P B(v, v)      + G_n(v) dW]
//! xi+   = E [xi   - dt F(v, xi)       + curl G_n(v) dW]
//! zeta+ = E [zeta                     + curl G_n(v) dW]
//! beta+ = E [beta - dt F(v, zeta+beta)]
//! ```
//!
//! Noise is evaluated at the start-of-step velocity and all four fields
//! consume the same increment.

use serde::{Deserialize, Serialize};

use crate::error::{Result, VortexError};
use crate::field::{ScalarField, VectorField};
use crate::grid::SpectralGrid;
use crate::noise::{self, CovarianceSpec, NoiseStream, WienerIncrement};
use crate::norms;
use crate::ops::{self, Advector};
use crate::stats::{self, HolderReport, PathStatus, StepDiagnostics, TrajectoryStats};

pub const DEFAULT_BLOWUP: f64 = 1e6;

/// Relative tolerance on `curl v0 = xi0` for initial data.
pub const CONSISTENCY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[default]
    ExpEuler,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_end: f64,
    #[serde(default)]
    pub scheme: Scheme,
    #[serde(default = "default_blowup")]
    pub blowup_threshold: f64,
}

fn default_blowup() -> f64 {
    DEFAULT_BLOWUP
}

impl SolverConfig {
    pub fn new(dt: f64, t_end: f64) -> Result<Self> {
        let cfg = Self {
            dt,
            t_end,
            scheme: Scheme::ExpEuler,
            blowup_threshold: DEFAULT_BLOWUP,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(VortexError::param("solver.dt", "must be positive"));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(VortexError::param("solver.t_end", "must be positive"));
        }
        if self.dt > self.t_end {
            return Err(VortexError::param(
                "solver.dt",
                format!("dt = {} exceeds t_end = {}", self.dt, self.t_end),
            ));
        }
        let ratio = self.t_end / self.dt;
        if (ratio - ratio.round()).abs() > 1e-9 * ratio {
            return Err(VortexError::param(
                "solver.dt",
                format!("t_end / dt = {ratio} is not an integer"),
            ));
        }
        if !(self.blowup_threshold > 0.0) {
            return Err(VortexError::param("solver.blowup_threshold", "must be positive"));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }
}

/// `(t, v, xi, zeta, beta)` with `xi = zeta + beta`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledState {
    pub t: f64,
    pub v: VectorField,
    pub xi: ScalarField,
    pub zeta: ScalarField,
    pub beta: ScalarField,
}

impl CoupledState {
    /// Initial state with `zeta = 0`, `beta = xi0`. Rejects data with
    /// `curl v0 != xi0` or nonzero mean vorticity.
    pub fn new(v0: VectorField, xi0: ScalarField) -> Result<Self> {
        v0.grid().check_same(xi0.grid())?;
        let scale = xi0.max_abs();
        if xi0.coeffs()[0].norm() > ops::MEAN_TOLERANCE * scale {
            return Err(VortexError::NonzeroMean(xi0.mean()));
        }
        let defect = ops::curl(&v0);
        let num = norms::sobolev_norm_spectral(&(&defect - &xi0), 0.0);
        let den = norms::sobolev_norm_spectral(&xi0, 0.0);
        let rel = if den > 0.0 { num / den } else { num };
        if rel > CONSISTENCY_TOLERANCE {
            return Err(VortexError::InconsistentData(rel));
        }
        let grid = *xi0.grid();
        Ok(Self {
            t: 0.0,
            v: v0,
            beta: xi0.clone(),
            xi: xi0,
            zeta: ScalarField::zeros(grid),
        })
    }

    /// Velocity recovered by Biot-Savart.
    pub fn from_vorticity(xi0: ScalarField) -> Result<Self> {
        let v0 = ops::biot_savart(&xi0)?;
        Self::new(v0, xi0)
    }

    pub fn grid(&self) -> &SpectralGrid {
        self.xi.grid()
    }
}

/// Precomputed semigroup factors for one `(grid, dt)`.
pub struct Stepper {
    grid: SpectralGrid,
    dt: f64,
    decay: Vec<f64>,
    threshold: f64,
}

impl Stepper {
    pub fn new(grid: SpectralGrid, cfg: &SolverConfig) -> Self {
        let decay = (0..grid.len()).map(|o| (-grid.k_squared(o) * cfg.dt).exp()).collect();
        Self {
            grid,
            dt: cfg.dt,
            decay,
            threshold: cfg.blowup_threshold,
        }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn propagate(&self, f: &mut ScalarField) {
        for (c, e) in f.coeffs_mut().iter_mut().zip(&self.decay) {
            *c *= *e;
        }
    }

    fn guard(&self, t: f64, norm: f64) -> Result<()> {
        if !norm.is_finite() || norm > self.threshold {
            return Err(VortexError::BlowUp {
                time: t,
                norm,
                threshold: self.threshold,
            });
        }
        Ok(())
    }

    /// `v+ = E [v - dt P B(v, v) + noise]`.
    pub(crate) fn velocity(&self, v: &VectorField, noise_v: &VectorField, adv: &Advector, t: f64) -> Result<VectorField> {
        let b = VectorField {
            c1: adv.transport(v.x()),
            c2: adv.transport(v.y()),
        };
        let pb = ops::leray_project(&b);
        let mut out = v.clone();
        out.axpy(-self.dt, &pb)?;
        out.axpy(1.0, noise_v)?;
        self.propagate(&mut out.c1);
        self.propagate(&mut out.c2);
        self.guard(t + self.dt, norms::sobolev_norm_spectral(&out, 0.0))?;
        Ok(out)
    }

    /// `xi+ = E [xi - dt F(v, xi) + noise]`, mean forced to zero.
    pub(crate) fn vorticity(&self, xi: &ScalarField, noise_xi: &ScalarField, adv: &Advector, t: f64) -> Result<ScalarField> {
        let mut out = xi.clone();
        out.axpy(-self.dt, &adv.transport(xi))?;
        out.axpy(1.0, noise_xi)?;
        self.propagate(&mut out);
        out.coeffs_mut()[0] = Default::default();
        self.guard(t + self.dt, norms::sobolev_norm_spectral(&out, 0.0))?;
        Ok(out)
    }

    /// `zeta+ = E [zeta + noise]`.
    pub(crate) fn ou(&self, zeta: &ScalarField, noise_xi: &ScalarField) -> Result<ScalarField> {
        let mut out = zeta.clone();
        out.axpy(1.0, noise_xi)?;
        self.propagate(&mut out);
        Ok(out)
    }

    /// `beta+ = E [beta - dt F(v, zeta + beta)]`, mean forced to zero.
    pub(crate) fn beta(&self, zeta: &ScalarField, beta: &ScalarField, adv: &Advector) -> Result<ScalarField> {
        let total = zeta + beta;
        let mut out = beta.clone();
        out.axpy(-self.dt, &adv.transport(&total))?;
        self.propagate(&mut out);
        out.coeffs_mut()[0] = Default::default();
        Ok(out)
    }

    /// Advances all four fields with one shared increment.
    pub fn step(&self, state: &CoupledState, dw: &WienerIncrement, spec: &CovarianceSpec) -> Result<CoupledState> {
        let noise_v = noise::velocity_noise(&state.v, dw, spec)?;
        let noise_xi = ops::curl(&noise_v);
        let adv = Advector::new(&state.v);
        let v = self.velocity(&state.v, &noise_v, &adv, state.t)?;
        let xi = self.vorticity(&state.xi, &noise_xi, &adv, state.t)?;
        let zeta = self.ou(&state.zeta, &noise_xi)?;
        let beta = self.beta(&state.zeta, &state.beta, &adv)?;
        Ok(CoupledState {
            t: state.t + self.dt,
            v,
            xi,
            zeta,
            beta,
        })
    }

    /// Velocity equation alone.
    pub fn step_velocity(&self, v: &VectorField, t: f64, dw: &WienerIncrement, spec: &CovarianceSpec) -> Result<VectorField> {
        let noise_v = noise::velocity_noise(v, dw, spec)?;
        self.velocity(v, &noise_v, &Advector::new(v), t)
    }

    /// Ornstein-Uhlenbeck equation alone, noise intensity evaluated at `v`.
    pub fn step_ou(&self, zeta: &ScalarField, v: &VectorField, dw: &WienerIncrement, spec: &CovarianceSpec) -> Result<ScalarField> {
        let noise_xi = ops::curl(&noise::velocity_noise(v, dw, spec)?);
        self.ou(zeta, &noise_xi)
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }
}

fn stepper_for(state: &CoupledState, cfg: &SolverConfig) -> Result<Stepper> {
    cfg.validate()?;
    Ok(Stepper::new(*state.grid(), cfg))
}

/// One velocity step `v+ = E [v - dt P B(v,v) + G(v) dW]`.
pub fn velocity_step(state: &CoupledState, dw: &WienerIncrement, spec: &CovarianceSpec, cfg: &SolverConfig) -> Result<VectorField> {
    stepper_for(state, cfg)?.step_velocity(&state.v, state.t, dw, spec)
}

/// One vorticity step driven by `state.v`.
pub fn vorticity_step(state: &CoupledState, dw: &WienerIncrement, spec: &CovarianceSpec, cfg: &SolverConfig) -> Result<ScalarField> {
    let stepper = stepper_for(state, cfg)?;
    let noise_xi = ops::curl(&noise::velocity_noise(&state.v, dw, spec)?);
    stepper.vorticity(&state.xi, &noise_xi, &Advector::new(&state.v), state.t)
}

/// One Ornstein-Uhlenbeck step for `zeta`.
pub fn ou_step(state: &CoupledState, dw: &WienerIncrement, spec: &CovarianceSpec, cfg: &SolverConfig) -> Result<ScalarField> {
    stepper_for(state, cfg)?.step_ou(&state.zeta, &state.v, dw, spec)
}

/// One deterministic step for the remainder `beta`.
pub fn beta_step(state: &CoupledState, cfg: &SolverConfig) -> Result<ScalarField> {
    let stepper = stepper_for(state, cfg)?;
    stepper.beta(&state.zeta, &state.beta, &Advector::new(&state.v))
}

/// Hölder sampling of `zeta` along a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HolderSampling {
    /// Spatial order `delta` of the `W^{delta,q}` norm.
    pub space_order: f64,
    /// Time exponent `beta`.
    pub exponent: f64,
    pub q: f64,
    /// Steps between stored samples.
    pub stride: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryOptions {
    /// Exponent of the `sup ||xi||_{L^q}` functionals.
    pub q: f64,
    /// Keep every `record_stride`-th state (0 keeps none).
    pub record_stride: usize,
    pub holder: Option<HolderSampling>,
}

impl Default for TrajectoryOptions {
    fn default() -> Self {
        Self {
            q: 4.0,
            record_stride: 0,
            holder: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub stats: TrajectoryStats,
    pub series: Vec<StepDiagnostics>,
    pub states: Vec<CoupledState>,
    pub blowup: Option<String>,
}

fn diagnostics(state: &CoupledState, q: f64) -> Result<StepDiagnostics> {
    Ok(StepDiagnostics {
        t: state.t,
        v_l2sq: norms::sobolev_norm_spectral(&state.v, 0.0).powi(2),
        grad_v_sq: norms::grad_l2(&state.v).powi(2),
        xi_l2: norms::sobolev_norm_spectral(&state.xi, 0.0),
        xi_lq: norms::lq_norm(&state.xi, q)?,
        beta_l2: norms::sobolev_norm_spectral(&state.beta, 0.0),
        grad_beta_sq: norms::grad_l2(&state.beta).powi(2),
        beta_lq: norms::lq_norm(&state.beta, q)?,
    })
}

/// Integrates from `initial` to `cfg.t_end`, step `i` drawing its increment
/// from `stream` at counter `i`. A blow-up ends the path early with status
/// [`PathStatus::Blowup`].
pub fn run_trajectory(
    initial: &CoupledState,
    spec: &CovarianceSpec,
    cfg: &SolverConfig,
    stream: &NoiseStream,
    opts: &TrajectoryOptions,
) -> Result<Trajectory> {
    cfg.validate()?;
    spec.validate(initial.grid())?;
    let stepper = Stepper::new(*initial.grid(), cfg);
    let steps = cfg.steps();
    let mut state = initial.clone();
    let mut series = Vec::with_capacity(steps + 1);
    let mut states = Vec::new();
    let mut zeta_times = Vec::new();
    let mut zeta_path = Vec::new();
    let mut blowup = None;

    for i in 0..=steps {
        series.push(diagnostics(&state, opts.q)?);
        if opts.record_stride > 0 && i % opts.record_stride == 0 {
            states.push(state.clone());
        }
        if let Some(h) = &opts.holder {
            if h.stride > 0 && i % h.stride == 0 {
                zeta_times.push(state.t);
                zeta_path.push(state.zeta.clone());
            }
        }
        if i == steps {
            break;
        }
        let dw = noise::sample_increment(stream, i as u64, spec, cfg.dt)?;
        match stepper.step(&state, &dw, spec) {
            Ok(mut next) => {
                next.t = (i + 1) as f64 * cfg.dt;
                state = next;
            }
            Err(e @ VortexError::BlowUp { .. }) => {
                blowup = Some(e.to_string());
                break;
            }
            Err(e) => return Err(e),
        }
    }

    let mut stats = stats::fold_diagnostics(&series, cfg.dt);
    if let Some(h) = &opts.holder {
        stats.zeta_holder = stats::holder_quotient(&zeta_times, &zeta_path, h.space_order, h.exponent, h.q)?;
    } else {
        stats.zeta_holder = HolderReport::empty(0.0, 0.0);
    }
    if blowup.is_some() {
        stats.status = PathStatus::Blowup;
    }
    Ok(Trajectory {
        stats,
        series,
        states,
        blowup,
    })
}

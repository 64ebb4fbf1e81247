//! JSON experiment configuration. Unknown keys are rejected; every section
//! except `grid` and `solver` has defaults, and the resolved form (defaults
//! filled, CLI overrides applied) is what gets hashed into the manifest.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Result, VortexError};
use crate::estimates::{BdgSetting, HolderParams, IdentityTolerances, MonteCarlo};
use crate::field::ScalarField;
use crate::grid::{SpectralGrid, DEFAULT_DEALIAS};
use crate::integrator::{CoupledState, SolverConfig};
use crate::noise::{CovarianceSpec, HyLevel, NoiseMode, Phase, Pivot, SigmaKind, DEFAULT_ROUGHNESS};
use crate::random::random_scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub grid: GridConfig,
    pub solver: SolverConfig,
    #[serde(default)]
    pub initial: InitialConfig,
    #[serde(default)]
    pub noise: NoiseConfig,
    #[serde(default)]
    pub mc: McConfig,
    #[serde(default)]
    pub checks: ChecksConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
    #[serde(default = "two_pi")]
    pub length: f64,
    #[serde(default = "default_dealias")]
    pub dealias_fraction: f64,
}

fn two_pi() -> f64 {
    2.0 * PI
}

fn default_dealias() -> f64 {
    DEFAULT_DEALIAS
}

/// One real vorticity mode `amplitude * cos(k.x)` or `sin(k.x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VorticityMode {
    pub j1: i64,
    pub j2: i64,
    pub phase: Phase,
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialConfig {
    /// Random dealiased vorticity with `|k|^{-2}` amplitudes.
    Random {
        #[serde(default = "default_l2")]
        l2: f64,
        #[serde(default)]
        seed: u64,
    },
    Modes { modes: Vec<VorticityMode> },
}

fn default_l2() -> f64 {
    2.0
}

impl Default for InitialConfig {
    fn default() -> Self {
        InitialConfig::Random {
            l2: default_l2(),
            seed: 0,
        }
    }
}

/// Covariance: explicit `modes`, or every half-plane mode up to `max_j` with
/// `c_k = c0 |k|^{-decay}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseConfig {
    pub modes: Option<Vec<NoiseMode>>,
    pub max_j: i64,
    pub c0: f64,
    pub decay: f64,
    pub sigma_kind: SigmaKind,
    pub pivot: Pivot,
    pub g: f64,
    pub hy_level: HyLevel,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            modes: None,
            max_j: 4,
            c0: 2.0,
            decay: 1.1,
            sigma_kind: SigmaKind::RationalSquare,
            pivot: Pivot::default(),
            g: DEFAULT_ROUGHNESS,
            hy_level: HyLevel::Infinite,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McConfig {
    pub n_paths: usize,
    pub base_seed: u64,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            n_paths: 8,
            base_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChecksConfig {
    /// Exponent of the `L^q` functionals.
    pub q: f64,
    pub energy: EnergyCheck,
    pub hy_uniformity: HyCheck,
    pub zeta_regularity: ZetaCheck,
    pub gronwall: GronwallCheck,
    pub identities: IdentityCheck,
    pub noise_norms: NoiseNormCheck,
    pub bdg: BdgCheck,
}

impl Default for ChecksConfig {
    fn default() -> Self {
        Self {
            q: 4.0,
            energy: EnergyCheck::default(),
            hy_uniformity: HyCheck::default(),
            zeta_regularity: ZetaCheck::default(),
            gronwall: GronwallCheck::default(),
            identities: IdentityCheck::default(),
            noise_norms: NoiseNormCheck::default(),
            bdg: BdgCheck::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnergyCheck {
    pub enabled: bool,
    pub ceiling: f64,
}

impl Default for EnergyCheck {
    fn default() -> Self {
        Self {
            enabled: true,
            ceiling: 1e6,
        }
    }
}

fn default_levels() -> Vec<HyLevel> {
    vec![
        HyLevel::Finite(1),
        HyLevel::Finite(10),
        HyLevel::Finite(100),
        HyLevel::Infinite,
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HyCheck {
    pub enabled: bool,
    pub levels: Vec<HyLevel>,
    pub factor: f64,
}

impl Default for HyCheck {
    fn default() -> Self {
        Self {
            enabled: false,
            levels: default_levels(),
            factor: 1.5,
        }
    }
}

/// Runs on the levels of `hy_uniformity`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ZetaCheck {
    pub enabled: bool,
    pub beta: f64,
    pub delta: f64,
    pub p: f64,
    pub q: f64,
    pub factor: f64,
    /// Steps between stored samples of `zeta`.
    pub stride: usize,
}

impl Default for ZetaCheck {
    fn default() -> Self {
        Self {
            enabled: false,
            beta: 0.05,
            delta: 0.0,
            p: 8.0,
            q: 2.0,
            factor: 2.0,
            stride: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GronwallCheck {
    pub enabled: bool,
    /// `|V(0)|_{L^2}`; zero runs the identical-data check.
    pub perturbation: f64,
    pub slack: f64,
    pub gn_trials: usize,
    pub perturbation_seed: u64,
}

impl Default for GronwallCheck {
    fn default() -> Self {
        Self {
            enabled: false,
            perturbation: 1e-3,
            slack: 0.05,
            gn_trials: 10_000,
            perturbation_seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IdentityCheck {
    pub enabled: bool,
    pub trials: usize,
    pub seed: u64,
    pub tolerances: IdentityTolerances,
}

impl Default for IdentityCheck {
    fn default() -> Self {
        Self {
            enabled: false,
            trials: 100,
            seed: 1,
            tolerances: IdentityTolerances::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseNormCheck {
    pub enabled: bool,
    pub states: usize,
    pub seed: u64,
}

impl Default for NoiseNormCheck {
    fn default() -> Self {
        Self {
            enabled: false,
            states: 50,
            seed: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BdgCheck {
    pub enabled: bool,
    pub q: f64,
    pub m_list: Vec<u32>,
    pub grids: Vec<usize>,
    pub horizons: Vec<f64>,
    pub paths: usize,
    pub monitors: usize,
    pub tolerance: f64,
}

impl Default for BdgCheck {
    fn default() -> Self {
        Self {
            enabled: false,
            q: 4.0,
            m_list: vec![2, 4],
            grids: vec![64, 128],
            horizons: vec![0.25, 0.5],
            paths: 500,
            monitors: 64,
            tolerance: 0.5,
        }
    }
}

impl BdgCheck {
    pub fn settings(&self) -> Vec<BdgSetting> {
        self.grids
            .iter()
            .flat_map(|&n| self.horizons.iter().map(move |&t_end| BdgSetting { n, t_end }))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub directory: String,
    /// Steps between field snapshots; 0 disables them.
    pub snapshot_stride: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: "out".into(),
            snapshot_stride: 0,
        }
    }
}

fn invalid(field: &str, e: impl std::fmt::Display) -> VortexError {
    VortexError::param(field, e.to_string())
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| VortexError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn grid(&self) -> Result<SpectralGrid> {
        SpectralGrid::with_dealias(self.grid.n, self.grid.length, self.grid.dealias_fraction)
            .map_err(|e| invalid("grid", e))
    }

    pub fn covariance(&self) -> Result<CovarianceSpec> {
        let grid = self.grid()?;
        let n = &self.noise;
        let mut spec = match &n.modes {
            Some(modes) => CovarianceSpec {
                modes: modes.clone(),
                roughness: n.g,
                sigma: n.sigma_kind,
                pivot: n.pivot,
                hy_level: n.hy_level,
            },
            None => CovarianceSpec::power_law(&grid, n.max_j, n.c0, n.decay),
        };
        spec.roughness = n.g;
        spec.sigma = n.sigma_kind;
        spec.pivot = n.pivot;
        spec.hy_level = n.hy_level;
        spec.validate(&grid).map_err(|e| invalid("noise", e))?;
        Ok(spec)
    }

    pub fn initial_state(&self) -> Result<CoupledState> {
        let grid = self.grid()?;
        let xi = match &self.initial {
            InitialConfig::Random { l2, seed } => random_scalar(&grid, &mut ChaCha8Rng::seed_from_u64(*seed), *l2),
            InitialConfig::Modes { modes } => {
                let mut xi = ScalarField::zeros(grid);
                for m in modes {
                    if m.j1 == 0 && m.j2 == 0 {
                        return Err(invalid("initial.modes", "vorticity must be mean-zero"));
                    }
                    let c = match m.phase {
                        Phase::Cos => Complex64::new(0.5 * m.amplitude, 0.0),
                        Phase::Sin => Complex64::new(0.0, -0.5 * m.amplitude),
                    };
                    let old = xi.mode(m.j1, m.j2).ok_or_else(|| invalid("initial.modes", format!("mode ({}, {}) outside the grid band", m.j1, m.j2)))?;
                    xi.set_real_mode(m.j1, m.j2, old + c)
                        .map_err(|e| invalid("initial.modes", e))?;
                }
                xi
            }
        };
        CoupledState::from_vorticity(xi).map_err(|e| invalid("initial", e))
    }

    pub fn monte_carlo(&self) -> MonteCarlo {
        MonteCarlo {
            n_paths: self.mc.n_paths,
            seed: self.mc.base_seed,
        }
    }

    pub fn holder_params(&self) -> HolderParams {
        let z = &self.checks.zeta_regularity;
        HolderParams {
            beta: z.beta,
            delta: z.delta,
            p: z.p,
            q: z.q,
            g: self.noise.g,
        }
    }

    /// Re-checks every invariant; errors name the offending field.
    pub fn validate(&self) -> Result<()> {
        let grid = self.grid()?;
        self.solver.validate()?;
        if !(self.noise.g > 0.0 && self.noise.g < 1.0) {
            return Err(invalid("noise.g", "must lie in (0, 1)"));
        }
        if self.noise.modes.is_none() && self.noise.max_j < 1 {
            return Err(invalid("noise.max_j", "must be at least 1"));
        }
        self.covariance()?;
        if let InitialConfig::Random { l2, .. } = self.initial {
            if !(l2 >= 0.0 && l2.is_finite()) {
                return Err(invalid("initial.l2", "must be finite and nonnegative"));
            }
        }
        self.initial_state()?;
        if self.mc.n_paths == 0 {
            return Err(invalid("mc.n_paths", "must be at least 1"));
        }
        let c = &self.checks;
        if !(c.q >= 1.0) {
            return Err(invalid("checks.q", "must be at least 1"));
        }
        if c.energy.enabled && self.mc.n_paths < 2 {
            return Err(invalid("mc.n_paths", "the energy check needs at least 2 paths"));
        }
        if (c.hy_uniformity.enabled || c.zeta_regularity.enabled) && c.hy_uniformity.levels.is_empty() {
            return Err(invalid("checks.hy_uniformity.levels", "must not be empty"));
        }
        if c.hy_uniformity.enabled && c.hy_uniformity.levels.len() < 2 {
            return Err(invalid("checks.hy_uniformity.levels", "need at least 2 levels"));
        }
        if c.zeta_regularity.enabled {
            let h = self.holder_params();
            if !(h.margin() > 0.0) {
                return Err(invalid(
                    "checks.zeta_regularity",
                    format!(
                        "beta + delta/2 + 1/p = {} is not below (1 - g)/2 = {}",
                        h.beta + 0.5 * h.delta + 1.0 / h.p,
                        0.5 * (1.0 - h.g)
                    ),
                ));
            }
            if c.zeta_regularity.stride == 0 {
                return Err(invalid("checks.zeta_regularity.stride", "must be at least 1"));
            }
            if !(c.zeta_regularity.q >= 1.0 && c.zeta_regularity.q.is_finite()) {
                return Err(invalid("checks.zeta_regularity.q", "must be finite and at least 1"));
            }
        }
        if c.gronwall.enabled && !(c.gronwall.perturbation >= 0.0) {
            return Err(invalid("checks.gronwall.perturbation", "must be nonnegative"));
        }
        if c.identities.enabled && c.identities.trials == 0 {
            return Err(invalid("checks.identities.trials", "must be at least 1"));
        }
        if c.bdg.enabled {
            let b = &c.bdg;
            if b.m_list.is_empty() || b.m_list.iter().any(|&m| m < 2 || m % 2 != 0) {
                return Err(invalid("checks.bdg.m_list", "moments must be even and at least 2"));
            }
            if b.grids.iter().any(|&n| n < grid.n()) || b.grids.is_empty() {
                return Err(invalid("checks.bdg.grids", "grids must be at least grid.n"));
            }
            if b.horizons.is_empty() || b.horizons.iter().any(|&t| !(t > 0.0)) {
                return Err(invalid("checks.bdg.horizons", "horizons must be positive"));
            }
            if b.paths == 0 || b.monitors == 0 {
                return Err(invalid("checks.bdg", "paths and monitors must be positive"));
            }
            if !(b.q >= 1.0 && b.q.is_finite()) {
                return Err(invalid("checks.bdg.q", "must be finite and at least 1"));
            }
        }
        if self.output.directory.is_empty() {
            return Err(invalid("output.directory", "must not be empty"));
        }
        Ok(())
    }

    /// Pretty JSON with every default filled in; reloads to an equal config.
    pub fn resolved_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    /// SHA-256 of the compact resolved JSON.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| VortexError::io(path.display().to_string(), e))?;
    ExperimentConfig::from_json(&text)
}

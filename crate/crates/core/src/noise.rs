//! Multiplicative noise `G(v) h_k = c_k sigma(v) e_k`, its curl, Hille-Yosida
//! regularization and the Hilbert-Schmidt / gamma-radonifying norms.
//!
//! The cylindrical Wiener process is truncated to the finitely many modes of
//! a [`CovarianceSpec`]. Each mode is a divergence-free Fourier vector field
//! `a_k cos(k.x)` or `a_k sin(k.x)` with `a_k = k_perp / |k|`, normalized to
//! unit `H^{1-g,2}` norm.

use std::collections::HashSet;
use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Result, VortexError};
use crate::field::{ScalarField, VectorField};
use crate::grid::SpectralGrid;
use crate::norms::{self, Field};
use crate::ops;

pub const DEFAULT_ROUGHNESS: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Cos,
    Sin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaKind {
    ConstantOne,
    RationalSquare,
    Zero,
}

/// Which field the noise is delivered to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseTarget {
    Velocity,
    Vorticity,
}

/// Hille-Yosida level `n` of `R_n = n (n I + A)^{-1}`; `Infinite` is the identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HyLevel {
    Finite(u64),
    Infinite,
}

impl HyLevel {
    pub fn finite(n: i64) -> Result<Self> {
        if n <= 0 {
            return Err(VortexError::InvalidLevel(n));
        }
        Ok(HyLevel::Finite(n as u64))
    }

    /// `n / (n + |k|^2)`.
    #[inline]
    pub fn symbol(&self, k_squared: f64) -> f64 {
        match *self {
            HyLevel::Finite(n) => {
                let n = n as f64;
                n / (n + k_squared)
            }
            HyLevel::Infinite => 1.0,
        }
    }
}

impl fmt::Display for HyLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HyLevel::Finite(n) => write!(f, "{n}"),
            HyLevel::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for HyLevel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            HyLevel::Finite(n) => s.serialize_u64(*n),
            HyLevel::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for HyLevel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(n) => HyLevel::finite(n).map_err(serde::de::Error::custom),
            Raw::Text(t) if t == "inf" => Ok(HyLevel::Infinite),
            Raw::Text(t) => Err(serde::de::Error::custom(format!(
                "expected positive integer or \"inf\", got {t:?}"
            ))),
        }
    }
}

/// Applies `R_n` mode by mode.
pub fn hille_yosida<F: Field>(field: &F, level: HyLevel) -> F {
    if level == HyLevel::Infinite {
        return field.clone();
    }
    let grid = *field.grid();
    field.map_parts(|p| p.apply_symbol(|o| level.symbol(grid.k_squared(o))))
}

/// One retained mode of the noise with its coefficient `c_k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseMode {
    pub j1: i64,
    pub j2: i64,
    pub phase: Phase,
    pub coefficient: f64,
}

/// Pivot `h = amplitude * a_k cos(k.x)` of `sigma(v) = <v,h>^2 / (1 + <v,h>^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pivot {
    pub j1: i64,
    pub j2: i64,
    pub amplitude: f64,
}

impl Default for Pivot {
    fn default() -> Self {
        Self {
            j1: 1,
            j2: 0,
            amplitude: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CovarianceSpec {
    pub modes: Vec<NoiseMode>,
    pub roughness: f64,
    pub sigma: SigmaKind,
    pub pivot: Pivot,
    pub hy_level: HyLevel,
}

impl CovarianceSpec {
    /// All half-plane modes with `1 <= max(|j1|, |j2|) <= max_j`, both phases,
    /// with `c_k = c0 |k|^{-a}`.
    pub fn power_law(grid: &SpectralGrid, max_j: i64, c0: f64, decay: f64) -> Self {
        let mut modes = Vec::new();
        for j1 in 0..=max_j {
            for j2 in -max_j..=max_j {
                if j1 == 0 && j2 <= 0 {
                    continue;
                }
                let k = grid.k0() * ((j1 * j1 + j2 * j2) as f64).sqrt();
                let coefficient = c0 * k.powf(-decay);
                for phase in [Phase::Cos, Phase::Sin] {
                    modes.push(NoiseMode {
                        j1,
                        j2,
                        phase,
                        coefficient,
                    });
                }
            }
        }
        Self {
            modes,
            roughness: DEFAULT_ROUGHNESS,
            sigma: SigmaKind::RationalSquare,
            pivot: Pivot::default(),
            hy_level: HyLevel::Infinite,
        }
    }

    pub fn single(j1: i64, j2: i64, phase: Phase, coefficient: f64) -> Self {
        Self {
            modes: vec![NoiseMode {
                j1,
                j2,
                phase,
                coefficient,
            }],
            roughness: DEFAULT_ROUGHNESS,
            sigma: SigmaKind::ConstantOne,
            pivot: Pivot::default(),
            hy_level: HyLevel::Infinite,
        }
    }

    pub fn with_sigma(mut self, sigma: SigmaKind) -> Self {
        self.sigma = sigma;
        self
    }

    pub fn with_level(mut self, level: HyLevel) -> Self {
        self.hy_level = level;
        self
    }

    pub fn with_roughness(mut self, g: f64) -> Self {
        self.roughness = g;
        self
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// `sum_k c_k^2`; finite here, reported as the HS condition.
    pub fn coefficient_sum_sq(&self) -> f64 {
        self.modes.iter().map(|m| m.coefficient * m.coefficient).sum()
    }

    pub fn validate(&self, grid: &SpectralGrid) -> Result<()> {
        if !(self.roughness > 0.0 && self.roughness < 1.0) {
            return Err(VortexError::param(
                "noise.roughness",
                format!("g must lie in (0, 1), got {}", self.roughness),
            ));
        }
        let half = (grid.n() / 2) as i64;
        let mut seen = HashSet::new();
        for m in &self.modes {
            if m.j1.abs() >= half || m.j2.abs() >= half {
                return Err(VortexError::ModeOutOfBand(m.j1, m.j2));
            }
            if m.j1 == 0 && m.j2 == 0 && m.phase == Phase::Sin {
                return Err(VortexError::param("noise.modes", "sin phase of the k=0 mode vanishes"));
            }
            if !m.coefficient.is_finite() {
                return Err(VortexError::param("noise.modes", "non-finite coefficient"));
            }
            // k and -k carry the same function up to sign
            let canon = if (m.j1, m.j2) < (-m.j1, -m.j2) {
                (-m.j1, -m.j2)
            } else {
                (m.j1, m.j2)
            };
            if !seen.insert((canon, m.phase)) {
                return Err(VortexError::DuplicateMode(m.j1, m.j2));
            }
        }
        let p = self.pivot;
        if p.j1.abs() >= half || p.j2.abs() >= half || (p.j1 == 0 && p.j2 == 0) {
            return Err(VortexError::param("noise.pivot", "pivot mode must be nonzero and in band"));
        }
        if !p.amplitude.is_finite() {
            return Err(VortexError::param("noise.pivot", "non-finite amplitude"));
        }
        Ok(())
    }

    pub fn pivot_field(&self, grid: &SpectralGrid) -> VectorField {
        let mut h = VectorField::zeros(*grid);
        add_mode(
            &mut h,
            grid,
            self.pivot.j1,
            self.pivot.j2,
            Phase::Cos,
            self.pivot.amplitude,
        );
        h
    }
}

/// Unit direction `k_perp / |k|`; `(1, 0)` at `k = 0`.
fn direction(grid: &SpectralGrid, j1: i64, j2: i64) -> (f64, f64) {
    if j1 == 0 && j2 == 0 {
        return (1.0, 0.0);
    }
    let (k1, k2) = (grid.k0() * j1 as f64, grid.k0() * j2 as f64);
    let k = (k1 * k1 + k2 * k2).sqrt();
    (-k2 / k, k1 / k)
}

/// Mode amplitudes of `cos(k.x)` / `sin(k.x)` at `+k` (the `-k` slot is the conjugate).
fn profile_coeff(phase: Phase) -> Complex64 {
    match phase {
        Phase::Cos => Complex64::new(0.5, 0.0),
        Phase::Sin => Complex64::new(0.0, -0.5),
    }
}

/// `||phi||_{L^2}` for `phi = cos(k.x)` or `sin(k.x)`.
fn profile_l2(grid: &SpectralGrid, j1: i64, j2: i64) -> f64 {
    if j1 == 0 && j2 == 0 {
        grid.length()
    } else {
        grid.length() / 2f64.sqrt()
    }
}

/// Adds `scale * a_k phi_k` to `v`.
fn add_mode(v: &mut VectorField, grid: &SpectralGrid, j1: i64, j2: i64, phase: Phase, scale: f64) {
    let (a1, a2) = direction(grid, j1, j2);
    let o = grid.mode_offset(j1, j2).expect("mode validated in band");
    let co = grid.conjugate_offset(o);
    if o == co {
        // k = 0: constant field
        v.c1.coeffs_mut()[o] += Complex64::new(scale * a1, 0.0);
        v.c2.coeffs_mut()[o] += Complex64::new(scale * a2, 0.0);
        return;
    }
    let z = profile_coeff(phase) * scale;
    v.c1.coeffs_mut()[o] += z * a1;
    v.c1.coeffs_mut()[co] += z.conj() * a1;
    v.c2.coeffs_mut()[o] += z * a2;
    v.c2.coeffs_mut()[co] += z.conj() * a2;
}

/// Normalization making `a_k phi_k` unit in `H^{1-g,2}`.
fn basis_scale(grid: &SpectralGrid, j1: i64, j2: i64, g: f64) -> f64 {
    let (k1, k2) = (grid.k0() * j1 as f64, grid.k0() * j2 as f64);
    let ksq = k1 * k1 + k2 * k2;
    1.0 / (profile_l2(grid, j1, j2) * (1.0 + ksq).powf(0.5 * (1.0 - g)))
}

fn mode_k_squared(grid: &SpectralGrid, m: &NoiseMode) -> f64 {
    let (k1, k2) = (grid.k0() * m.j1 as f64, grid.k0() * m.j2 as f64);
    k1 * k1 + k2 * k2
}

/// The basis `e_k`, normalized in `H^{1-g,2}` and pairwise orthogonal there.
pub fn build_noise_basis(spec: &CovarianceSpec, grid: &SpectralGrid) -> Result<Vec<VectorField>> {
    spec.validate(grid)?;
    Ok(spec
        .modes
        .iter()
        .map(|m| {
            let mut e = VectorField::zeros(*grid);
            add_mode(&mut e, grid, m.j1, m.j2, m.phase, basis_scale(grid, m.j1, m.j2, spec.roughness));
            e
        })
        .collect())
}

/// `sigma(v)`; values lie in `[0, 1)` for the rational form.
pub fn sigma_eval(v: &VectorField, spec: &CovarianceSpec) -> f64 {
    match spec.sigma {
        SigmaKind::ConstantOne => 1.0,
        SigmaKind::Zero => 0.0,
        SigmaKind::RationalSquare => {
            let h = spec.pivot_field(v.grid());
            let x = norms::inner_spectral(v, &h);
            let x2 = x * x;
            x2 / (1.0 + x2)
        }
    }
}

/// Standard normal draws for one time step, one per retained mode.
#[derive(Debug, Clone, PartialEq)]
pub struct WienerIncrement {
    pub dt: f64,
    pub gaussians: Vec<f64>,
}

impl WienerIncrement {
    pub fn zero(dt: f64, modes: usize) -> Self {
        Self {
            dt,
            gaussians: vec![0.0; modes],
        }
    }
}

/// Counter-based normal stream: the draws for `(seed, path, step)` do not
/// depend on which other steps or paths were generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NoiseStream {
    seed: u64,
    path: u64,
}

/// Words reserved per step in the ChaCha keystream.
const STEP_STRIDE_LOG2: u32 = 20;

impl NoiseStream {
    pub fn new(seed: u64, path: u64) -> Self {
        Self { seed, path }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn path(&self) -> u64 {
        self.path
    }

    /// Raw generator positioned at the start of `step`.
    pub fn rng_at(&self, step: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.path);
        rng.set_word_pos((step as u128) << STEP_STRIDE_LOG2);
        rng
    }

    pub fn normals(&self, step: u64, count: usize) -> Vec<f64> {
        assert!(
            count < (1usize << (STEP_STRIDE_LOG2 - 3)),
            "too many draws per step"
        );
        let mut rng = self.rng_at(step);
        (0..count).map(|_| rng.sample(StandardNormal)).collect()
    }
}

pub fn sample_increment(stream: &NoiseStream, step: u64, spec: &CovarianceSpec, dt: f64) -> Result<WienerIncrement> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(VortexError::param("dt", format!("must be positive, got {dt}")));
    }
    Ok(WienerIncrement {
        dt,
        gaussians: stream.normals(step, spec.len()),
    })
}

/// Velocity noise `R_n [sum_k c_k sigma(v) g_k sqrt(dt) e_k]`.
pub fn velocity_noise(v: &VectorField, dw: &WienerIncrement, spec: &CovarianceSpec) -> Result<VectorField> {
    if dw.gaussians.len() != spec.len() {
        return Err(VortexError::IncrementMismatch {
            expected: spec.len(),
            found: dw.gaussians.len(),
        });
    }
    let grid = *v.grid();
    let mut out = VectorField::zeros(grid);
    let sigma = sigma_eval(v, spec);
    if sigma == 0.0 {
        return Ok(out);
    }
    let root_dt = dw.dt.sqrt();
    for (m, g) in spec.modes.iter().zip(&dw.gaussians) {
        let amp = m.coefficient
            * sigma
            * g
            * root_dt
            * basis_scale(&grid, m.j1, m.j2, spec.roughness)
            * spec.hy_level.symbol(mode_k_squared(&grid, m));
        add_mode(&mut out, &grid, m.j1, m.j2, m.phase, amp);
    }
    Ok(out)
}

/// Result of [`apply_g`].
#[derive(Debug, Clone, PartialEq)]
pub enum NoiseField {
    Velocity(VectorField),
    Vorticity(ScalarField),
}

/// `G_n(v) dW` in velocity form, or its curl `G~_n(v) dW` in vorticity form.
pub fn apply_g(v: &VectorField, dw: &WienerIncrement, spec: &CovarianceSpec, target: NoiseTarget) -> Result<NoiseField> {
    let noise = velocity_noise(v, dw, spec)?;
    Ok(match target {
        NoiseTarget::Velocity => NoiseField::Velocity(noise),
        NoiseTarget::Vorticity => NoiseField::Vorticity(ops::curl(&noise)),
    })
}

/// Hilbert-Schmidt and square-function norms of `J^s G_n(v)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorNorms {
    pub hs: f64,
    pub radonifying: f64,
}

/// Images `K h_k` of the basis under the (regularized) noise operator, as
/// (mode, amplitude) with amplitude multiplying `a_k phi_k`.
fn image_amplitudes<'a>(
    v: &VectorField,
    spec: &'a CovarianceSpec,
) -> impl Iterator<Item = (&'a NoiseMode, f64)> + 'a {
    let grid = *v.grid();
    let sigma = sigma_eval(v, spec);
    spec.modes.iter().map(move |m| {
        let amp = m.coefficient
            * sigma
            * basis_scale(&grid, m.j1, m.j2, spec.roughness)
            * spec.hy_level.symbol(mode_k_squared(&grid, m));
        (m, amp)
    })
}

/// `hs = (sum_k ||J^s K h_k||^2_{L^2})^{1/2}` computed from the mode
/// amplitudes, and `radonifying = ||(sum_k |J^s K h_k|^2)^{1/2}||_{L^q}` by
/// evaluating the square function at the grid points, one per component for
/// the velocity target (matching the componentwise vector `L^q` norm). For
/// the vorticity target `K h_k = curl(G_n(v) h_k)`.
pub fn operator_norms(
    v: &VectorField,
    spec: &CovarianceSpec,
    s: f64,
    q: f64,
    target: NoiseTarget,
) -> Result<OperatorNorms> {
    if q.is_infinite() {
        return Err(VortexError::InvalidExponent(q));
    }
    if q.is_nan() || q < 1.0 {
        return Err(VortexError::InvalidExponent(q));
    }
    spec.validate(v.grid())?;
    let grid = *v.grid();
    let n = grid.n();
    let h = grid.length() / n as f64;
    let mut hs_sq = 0.0;
    let parts = match target {
        NoiseTarget::Velocity => 2,
        NoiseTarget::Vorticity => 1,
    };
    let mut square = vec![vec![0.0; grid.len()]; parts];
    for (m, amp) in image_amplitudes(v, spec) {
        if amp == 0.0 {
            continue;
        }
        let ksq = mode_k_squared(&grid, m);
        let (k1, k2) = (grid.k0() * m.j1 as f64, grid.k0() * m.j2 as f64);
        // curl(a_k cos) = -|k| sin, curl(a_k sin) = |k| cos
        let (profile_amp, phase) = match target {
            NoiseTarget::Velocity => (amp, m.phase),
            NoiseTarget::Vorticity => {
                let k = ksq.sqrt();
                match m.phase {
                    Phase::Cos => (-amp * k, Phase::Sin),
                    Phase::Sin => (amp * k, Phase::Cos),
                }
            }
        };
        let a = profile_amp * (1.0 + ksq).powf(0.5 * s);
        let is_zero_mode = m.j1 == 0 && m.j2 == 0;
        if is_zero_mode && phase == Phase::Sin {
            continue;
        }
        let l2 = profile_l2(&grid, m.j1, m.j2);
        hs_sq += a * a * l2 * l2;
        let (d1, d2) = direction(&grid, m.j1, m.j2);
        let weights = match target {
            NoiseTarget::Velocity => [d1 * d1, d2 * d2],
            NoiseTarget::Vorticity => [1.0, 0.0],
        };
        for (part, w) in square.iter_mut().zip(weights) {
            for (p, slot) in part.iter_mut().enumerate() {
                let x1 = (p / n) as f64 * h;
                let x2 = (p % n) as f64 * h;
                let arg = k1 * x1 + k2 * x2;
                let phi = match phase {
                    Phase::Cos => arg.cos(),
                    Phase::Sin => arg.sin(),
                };
                *slot += w * a * a * phi * phi;
            }
        }
    }
    let mut sum_q = 0.0;
    for part in square {
        let sq: Vec<f64> = part.into_iter().map(f64::sqrt).collect();
        sum_q += norms::lq_norm_values(&sq, grid.cell_area(), q)?.powf(q);
    }
    let radonifying = sum_q.powf(1.0 / q);
    Ok(OperatorNorms {
        hs: hs_sq.sqrt(),
        radonifying,
    })
}

/// Largest observed `|sigma(v1) - sigma(v2)| / ||v1 - v2||_{L^2}` over random
/// finite-difference pairs. For the rational form the sweep places
/// `<v, h>` across the region of steepest slope.
pub fn estimate_sigma_lipschitz<R: Rng + ?Sized>(
    spec: &CovarianceSpec,
    grid: &SpectralGrid,
    rng: &mut R,
    trials: usize,
) -> f64 {
    if spec.sigma != SigmaKind::RationalSquare {
        return 0.0;
    }
    let h = spec.pivot_field(grid);
    let h_norm = norms::sobolev_norm_spectral(&h, 0.0);
    if h_norm == 0.0 {
        return 0.0;
    }
    let mut best = 0.0f64;
    for _ in 0..trials {
        let size = rng.random_range(0.1..3.0);
        let base = crate::random::random_velocity(grid, rng, size);
        let dir = crate::random::random_velocity(grid, rng, 1.0);
        let step: f64 = rng.random_range(1e-4..1e-1);
        let v1 = base;
        let mut v2 = v1.clone();
        v2.axpy(step, &dir).expect("same grid");
        let dv = norms::sobolev_norm_spectral(&(&v1 - &v2), 0.0);
        let slope = (sigma_eval(&v1, spec) - sigma_eval(&v2, spec)).abs() / dv;
        best = best.max(slope);
        // sweep along the pivot direction as well
        let target = rng.random_range(-2.0..2.0);
        let mut w1 = h.scale(target / (h_norm * h_norm));
        w1.axpy(1.0, &crate::random::random_velocity(grid, rng, 1e-3)).expect("same grid");
        let mut w2 = w1.clone();
        w2.axpy(step / h_norm, &h).expect("same grid");
        let dw = norms::sobolev_norm_spectral(&(&w1 - &w2), 0.0);
        best = best.max((sigma_eval(&w1, spec) - sigma_eval(&w2, spec)).abs() / dw);
    }
    best
}

/// `||G(.)||_{HS(H; L^2)}` at `sigma = 1`, including the Hille-Yosida factor.
pub fn hs_l2_at_unit_sigma(spec: &CovarianceSpec, grid: &SpectralGrid) -> f64 {
    spec.modes
        .iter()
        .map(|m| {
            let a = m.coefficient
                * basis_scale(grid, m.j1, m.j2, spec.roughness)
                * spec.hy_level.symbol(mode_k_squared(grid, m))
                * profile_l2(grid, m.j1, m.j2);
            a * a
        })
        .sum::<f64>()
        .sqrt()
}

//! Per-path functionals recorded along a trajectory.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::field::ScalarField;
use crate::norms;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathStatus {
    Completed,
    Blowup,
}

impl PathStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            PathStatus::Completed => "completed",
            PathStatus::Blowup => "blowup",
        }
    }
}

/// Hölder quotient `sup ||u(t) - u(r)||_{W^{s,q}} / |t - r|^beta` over
/// sampled pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolderReport {
    pub space_order: f64,
    pub exponent: f64,
    pub quotient: f64,
}

impl HolderReport {
    pub fn empty(space_order: f64, exponent: f64) -> Self {
        Self {
            space_order,
            exponent,
            quotient: 0.0,
        }
    }
}

/// Hölder quotient of a sampled path over all pairs at dyadic lags
/// (`1, 2, 4, ...` samples) plus the full span. `q = 2` uses the spectral
/// Sobolev norm, other `q` the quadrature of `J^s`.
pub fn holder_quotient(times: &[f64], path: &[ScalarField], s: f64, beta: f64, q: f64) -> Result<HolderReport> {
    let mut report = HolderReport::empty(s, beta);
    let m = path.len();
    if m < 2 {
        return Ok(report);
    }
    let mut lags = Vec::new();
    let mut lag = 1;
    while lag < m {
        lags.push(lag);
        lag *= 2;
    }
    if *lags.last().expect("m >= 2") != m - 1 {
        lags.push(m - 1);
    }
    for lag in lags {
        for i in 0..m - lag {
            let diff = &path[i + lag] - &path[i];
            let norm = if q == 2.0 {
                norms::sobolev_norm_spectral(&diff, s)
            } else {
                norms::sobolev_norm(&diff, s, q)?
            };
            let dt = (times[i + lag] - times[i]).abs();
            report.quotient = report.quotient.max(norm / dt.powf(beta));
        }
    }
    Ok(report)
}

/// The functionals of one path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryStats {
    /// `sup_t ||v(t)||^2_{L^2}`
    pub sup_v_l2sq: f64,
    /// `int_0^T ||grad v||^2_{L^2} dt`, left Riemann sum
    pub int_grad_v: f64,
    /// `sup_t ||xi(t)||_{L^q}`
    pub sup_xi_lq: f64,
    /// `sup_t ||beta(t)||_{L^2}`
    pub sup_beta_l2: f64,
    /// `int_0^T ||grad beta||^2_{L^2} dt`
    pub int_grad_beta: f64,
    /// `sup_t ||beta(t)||_{L^q}`
    pub sup_beta_lq: f64,
    pub zeta_holder: HolderReport,
    pub status: PathStatus,
}

/// Names of the scalar functionals, in CSV column order.
pub const FUNCTIONALS: [&str; 6] = [
    "sup_v_l2sq",
    "int_grad_v",
    "sup_xi_lq",
    "sup_beta_l2",
    "int_grad_beta",
    "sup_beta_lq",
];

impl TrajectoryStats {
    pub fn functionals(&self) -> [f64; 6] {
        [
            self.sup_v_l2sq,
            self.int_grad_v,
            self.sup_xi_lq,
            self.sup_beta_l2,
            self.int_grad_beta,
            self.sup_beta_lq,
        ]
    }
}

/// Scalar diagnostics at one recorded time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepDiagnostics {
    pub t: f64,
    pub v_l2sq: f64,
    pub grad_v_sq: f64,
    pub xi_l2: f64,
    pub xi_lq: f64,
    pub beta_l2: f64,
    pub grad_beta_sq: f64,
    pub beta_lq: f64,
}

/// Folds per-step diagnostics into path functionals. Integrals are left
/// Riemann sums: every sample except the last carries weight `dt`.
pub fn fold_diagnostics(series: &[StepDiagnostics], dt: f64) -> TrajectoryStats {
    let mut stats = TrajectoryStats {
        sup_v_l2sq: 0.0,
        int_grad_v: 0.0,
        sup_xi_lq: 0.0,
        sup_beta_l2: 0.0,
        int_grad_beta: 0.0,
        sup_beta_lq: 0.0,
        zeta_holder: HolderReport::empty(0.0, 0.0),
        status: PathStatus::Completed,
    };
    let last = series.len().saturating_sub(1);
    for (i, d) in series.iter().enumerate() {
        stats.sup_v_l2sq = stats.sup_v_l2sq.max(d.v_l2sq);
        stats.sup_xi_lq = stats.sup_xi_lq.max(d.xi_lq);
        stats.sup_beta_l2 = stats.sup_beta_l2.max(d.beta_l2);
        stats.sup_beta_lq = stats.sup_beta_lq.max(d.beta_lq);
        if i < last {
            stats.int_grad_v += d.grad_v_sq * dt;
            stats.int_grad_beta += d.grad_beta_sq * dt;
        }
    }
    stats
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::SpectralGrid;
    use crate::random::random_scalar;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constant_path_has_zero_quotient() {
        let g = SpectralGrid::new(16, 1.0).unwrap();
        let f = random_scalar(&g, &mut ChaCha8Rng::seed_from_u64(1), 1.0);
        let times: Vec<f64> = (0..9).map(|i| i as f64 * 0.1).collect();
        let path = vec![f; 9];
        assert_eq!(holder_quotient(&times, &path, 0.0, 0.3, 2.0).unwrap().quotient, 0.0);
    }

    #[test]
    fn linear_path_quotient() {
        // u(t) = t phi, beta = 1/2: sup |t-r|^{1/2} ||phi|| = T^{1/2} ||phi||
        let g = SpectralGrid::new(16, 1.0).unwrap();
        let phi = random_scalar(&g, &mut ChaCha8Rng::seed_from_u64(2), 1.3);
        let t_end = 0.7;
        let times: Vec<f64> = (0..=10).map(|i| i as f64 * t_end / 10.0).collect();
        let path: Vec<ScalarField> = times.iter().map(|&t| phi.scale(t)).collect();
        let rep = holder_quotient(&times, &path, 0.0, 0.5, 2.0).unwrap();
        let expected = t_end.sqrt() * norms::sobolev_norm_spectral(&phi, 0.0);
        assert!((rep.quotient - expected).abs() < 1e-12 * expected);
        let rep4 = holder_quotient(&times, &path, 0.0, 0.5, 4.0).unwrap();
        let expected4 = t_end.sqrt() * norms::lq_norm(&phi, 4.0).unwrap();
        assert!((rep4.quotient - expected4).abs() < 1e-12 * expected4);
    }

    #[test]
    fn fold_uses_left_riemann_sums() {
        let mk = |t: f64, g: f64| StepDiagnostics {
            t,
            v_l2sq: t,
            grad_v_sq: g,
            xi_l2: 0.0,
            xi_lq: 2.0 - t,
            beta_l2: 0.0,
            grad_beta_sq: 2.0 * g,
            beta_lq: 0.0,
        };
        let series = [mk(0.0, 1.0), mk(0.5, 3.0), mk(1.0, 100.0)];
        let s = fold_diagnostics(&series, 0.5);
        assert_eq!(s.int_grad_v, 2.0);
        assert_eq!(s.int_grad_beta, 4.0);
        assert_eq!(s.sup_v_l2sq, 1.0);
        assert_eq!(s.sup_xi_lq, 2.0);
    }
}

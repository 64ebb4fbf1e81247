use std::f64::consts::PI;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use vortex::estimates::{batch_stability, bdg_report, map_paths, run_paths, summarize, BdgSetting, MonteCarlo};
use vortex::integrator::{CoupledState, SolverConfig, TrajectoryOptions};
use vortex::noise::{CovarianceSpec, NoiseStream, Phase, SigmaKind};
use vortex::random::{random_scalar, random_velocity};
use vortex::SpectralGrid;

fn grid(n: usize) -> SpectralGrid {
    SpectralGrid::new(n, 2.0 * PI).unwrap()
}

/// With one noise mode, `M(t) = B(t) Phi h`, so the fitted constant is the
/// moment of the discretely monitored Brownian maximum, simulated here directly.
#[test]
fn single_mode_bdg_constant_matches_brownian_maximum() {
    let g = grid(16);
    let spec = CovarianceSpec::single(1, 2, Phase::Cos, 0.7).with_sigma(SigmaKind::ConstantOne);
    let v0 = random_velocity(&g, &mut ChaCha8Rng::seed_from_u64(1), 1.0);
    let monitors = 16;
    let settings = [BdgSetting { n: 16, t_end: 0.25 }, BdgSetting { n: 32, t_end: 0.5 }];
    let r = bdg_report(&v0, &spec, 4.0, &[2, 4], &settings, monitors, &MonteCarlo { n_paths: 2000, seed: 3 }, 0.5).unwrap();
    assert!(r.skipped.is_none());

    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let draws = 200_000;
    let (mut m2, mut m4) = (Vec::with_capacity(draws), Vec::with_capacity(draws));
    for _ in 0..draws {
        let (mut b, mut best) = (0.0f64, 0.0f64);
        for _ in 0..monitors {
            let z: f64 = StandardNormal.sample(&mut rng);
            b += z / (monitors as f64).sqrt();
            best = best.max(b * b);
        }
        m2.push(best);
        m4.push(best * best);
    }
    let oracle = [summarize(&m2), summarize(&m4)];
    for c in &r.constants {
        let o = &oracle[(c.m / 2 - 1) as usize];
        let tol = 4.0 * (c.stderr.powi(2) + o.stderr.powi(2)).sqrt();
        assert!((c.constant - o.mean).abs() <= tol, "{c:?} vs {o:?}");
    }
}

#[test]
fn disjoint_seed_batches_agree() {
    let g = grid(16);
    let init = CoupledState::from_vorticity(random_scalar(&g, &mut ChaCha8Rng::seed_from_u64(0), 1.0)).unwrap();
    let spec = CovarianceSpec::power_law(&g, 3, 0.5, 1.1);
    let cfg = SolverConfig::new(1e-3, 0.05).unwrap();
    let opts = TrajectoryOptions::default();
    let a = run_paths(&init, &spec, &cfg, &opts, &MonteCarlo { n_paths: 16, seed: 1 }).unwrap();
    let b = run_paths(&init, &spec, &cfg, &opts, &MonteCarlo { n_paths: 16, seed: 2 }).unwrap();
    assert_ne!(a, b);
    let c = batch_stability(&a, &b, 0.05, 1);
    assert!(c.passed, "{c:?}");
}

#[test]
fn path_results_do_not_depend_on_ensemble_size() {
    let g = grid(16);
    let init = CoupledState::from_vorticity(random_scalar(&g, &mut ChaCha8Rng::seed_from_u64(0), 1.0)).unwrap();
    let spec = CovarianceSpec::power_law(&g, 3, 1.0, 1.1);
    let cfg = SolverConfig::new(1e-3, 0.02).unwrap();
    let opts = TrajectoryOptions::default();
    let small = run_paths(&init, &spec, &cfg, &opts, &MonteCarlo { n_paths: 2, seed: 4 }).unwrap();
    let large = run_paths(&init, &spec, &cfg, &opts, &MonteCarlo { n_paths: 5, seed: 4 }).unwrap();
    assert_eq!(small[..], large[..2]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn map_paths_preserves_order(n in 0usize..64) {
        let out = map_paths(n, |i| Ok(i * i)).unwrap();
        prop_assert_eq!(out, (0..n).map(|i| i * i).collect::<Vec<_>>());
    }

    #[test]
    fn noise_draws_depend_only_on_counter(seed in any::<u64>(), path in 0u64..1000, step in 0u64..10_000) {
        let s = NoiseStream::new(seed, path);
        let long = s.normals(step, 40);
        prop_assert_eq!(&s.normals(step, 7)[..], &long[..7]);
        prop_assert_ne!(s.normals(step + 1, 7), s.normals(step, 7));
        prop_assert_ne!(NoiseStream::new(seed, path + 1).normals(step, 7), s.normals(step, 7));
    }
}

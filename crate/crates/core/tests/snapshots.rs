use std::fs;
use std::process::Command;

use vortex::output::parse_stats_csv;
use vortex::snapshot;

/// `sup_t ||v||^2` and `sup_t ||beta||` recomputed from the written
/// snapshots by plain quadrature agree with `stats.csv`.
#[test]
fn snapshots_reproduce_energy_functionals() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("c.json");
    fs::write(
        &config,
        r#"{"grid": {"n": 16}, "solver": {"dt": 0.001, "t_end": 0.01},
            "mc": {"n_paths": 2, "base_seed": 8},
            "output": {"snapshot_stride": 1}}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let status = Command::new(env!("CARGO_BIN_EXE_vortex"))
        .args(["run", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .status()
        .unwrap();
    assert!(status.success());
    let rows = parse_stats_csv(&fs::read_to_string(out.join("stats.csv")).unwrap()).unwrap();

    for (p, row) in rows.iter().enumerate() {
        let mut sup_v: f64 = 0.0;
        let mut sup_beta: f64 = 0.0;
        for step in 0..=10 {
            let load = |name: &str| {
                let f = snapshot::load(&out.join(format!("snapshots/path{p:04}/step{step:06}_{name}.vspd"))).unwrap();
                let cell = (f.grid().length() / f.grid().n() as f64).powi(2);
                f.to_physical().iter().map(|x| x * x).sum::<f64>() * cell
            };
            sup_v = sup_v.max(load("v1") + load("v2"));
            sup_beta = sup_beta.max(load("beta").sqrt());
        }
        assert!((sup_v - row.values[0]).abs() <= 1e-12 * sup_v, "{sup_v} vs {}", row.values[0]);
        assert!((sup_beta - row.values[3]).abs() <= 1e-12 * sup_beta, "{sup_beta} vs {}", row.values[3]);
    }
    assert!(!out.join("snapshots/path0000/step000011_xi.vspd").exists());
}

#[test]
fn snapshot_of_zeta_starts_at_zero() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("c.json");
    fs::write(
        &config,
        r#"{"grid": {"n": 16}, "solver": {"dt": 0.01, "t_end": 0.02},
            "mc": {"n_paths": 2}, "output": {"snapshot_stride": 2}}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let status = Command::new(env!("CARGO_BIN_EXE_vortex"))
        .args(["run", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .status()
        .unwrap();
    assert!(status.success());
    let z0 = snapshot::load(&out.join("snapshots/path0001/step000000_zeta.vspd")).unwrap();
    assert_eq!(z0.max_abs(), 0.0);
    let z2 = snapshot::load(&out.join("snapshots/path0001/step000002_zeta.vspd")).unwrap();
    assert!(z2.max_abs() > 0.0);
    let bytes = fs::read(out.join("snapshots/path0001/step000002_xi.vspd")).unwrap();
    assert_eq!(&bytes[..4], b"VSPD");
    assert_eq!(bytes.len(), 16 + 8 * 256);
}

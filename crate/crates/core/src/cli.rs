//! `vortex run | check | report`.
//!
//! Exit status: 0 when every enabled check passes, 1 when one fails, 2 on
//! configuration or IO errors (nothing is written in that case).

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{load_config, ExperimentConfig};
use crate::error::{Result, VortexError};
use crate::estimates::{self, CheckResult, IdentityTolerances, MonteCarlo};
use crate::grid::SpectralGrid;
use crate::integrator::{HolderSampling, TrajectoryOptions};
use crate::output::{self, OutputFile};
use crate::random::random_velocity;
use crate::snapshot;
use crate::stats::{TrajectoryStats, FUNCTIONALS};

#[derive(Debug, Parser)]
#[command(name = "vortex", version, about = "Stochastic 2D Navier-Stokes simulator and estimate checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the Monte-Carlo experiment of a config file.
    Run(RunArgs),
    /// Run a standalone check suite.
    Check {
        #[command(subcommand)]
        suite: CheckSuite,
    },
    /// Summarize the outputs of a previous run.
    Report(ReportArgs),
}

#[derive(Debug, clap::Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides mc.base_seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides mc.n_paths.
    #[arg(long)]
    paths: Option<usize>,
    /// Overrides output.directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overwrite an existing output directory.
    #[arg(long)]
    force: bool,
}

#[derive(Debug, Subcommand)]
enum CheckSuite {
    /// Operator identities on random fields; JSON on stdout.
    Identities {
        #[arg(long, default_value_t = 64)]
        grid: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, clap::Args)]
struct ReportArgs {
    /// Output directory of `vortex run`.
    #[arg(long)]
    dir: PathBuf,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

/// Entry point; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Check {
            suite: CheckSuite::Identities { grid, trials, seed },
        } => cmd_identities(grid, trials, seed),
        Command::Report(a) => cmd_report(&a.dir, a.format),
    };
    match result {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

/// In-memory results of an experiment.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub stats: Vec<TrajectoryStats>,
    pub checks: Vec<CheckResult>,
    pub snapshots: Vec<OutputFile>,
    pub notes: Vec<String>,
}

/// Runs the ensemble and every enabled check of `cfg`.
pub fn execute(cfg: &ExperimentConfig) -> Result<Outcome> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let spec = cfg.covariance()?;
    let init = cfg.initial_state()?;
    let solver = cfg.solver;
    let mc = cfg.monte_carlo();
    let c = &cfg.checks;
    let opts = TrajectoryOptions {
        q: c.q,
        record_stride: cfg.output.snapshot_stride,
        holder: None,
    };

    let mut snapshots = Vec::new();
    let stats = if opts.record_stride > 0 {
        let trajectories = estimates::run_ensemble(&init, &spec, &solver, &opts, &mc)?;
        for (p, traj) in trajectories.iter().enumerate() {
            for (r, state) in traj.states.iter().enumerate() {
                let step = r * opts.record_stride;
                let fields = [
                    ("xi", &state.xi),
                    ("zeta", &state.zeta),
                    ("beta", &state.beta),
                    ("v1", state.v.x()),
                    ("v2", state.v.y()),
                ];
                for (name, f) in fields {
                    snapshots.push(OutputFile::new(
                        format!("snapshots/path{p:04}/step{step:06}_{name}.vspd"),
                        snapshot::encode(f)?,
                    ));
                }
            }
        }
        trajectories.into_iter().map(|t| t.stats).collect()
    } else {
        estimates::run_paths(&init, &spec, &solver, &opts, &mc)?
    };

    let mut checks = Vec::new();
    let mut notes = Vec::new();
    if c.energy.enabled {
        checks.extend(estimates::energy_report(&stats, c.energy.ceiling, mc.seed)?.checks);
    }
    if c.hy_uniformity.enabled || c.zeta_regularity.enabled {
        let z = &c.zeta_regularity;
        let level_opts = TrajectoryOptions {
            q: c.q,
            record_stride: 0,
            holder: z.enabled.then_some(HolderSampling {
                space_order: z.delta,
                exponent: z.beta,
                q: z.q,
                stride: z.stride,
            }),
        };
        let runs = estimates::run_levels(&init, &spec, &c.hy_uniformity.levels, &solver, &level_opts, &mc)?;
        if c.hy_uniformity.enabled {
            checks.extend(estimates::hy_uniformity(&runs, c.hy_uniformity.factor, mc.seed)?);
        }
        if z.enabled {
            checks.push(estimates::zeta_regularity(&runs, &cfg.holder_params(), z.factor, mc.seed)?);
        }
    }
    if c.gronwall.enabled {
        let g = &c.gronwall;
        let calib = estimates::calibrate_gronwall(&spec, &grid, g.gn_trials, g.perturbation_seed);
        let mut v0_b = init.v.clone();
        if g.perturbation > 0.0 {
            let mut rng = ChaCha8Rng::seed_from_u64(g.perturbation_seed);
            v0_b.axpy(1.0, &random_velocity(&grid, &mut rng, g.perturbation))?;
        }
        let report = estimates::gronwall_uniqueness(&init.v, &v0_b, &spec, &solver, &mc, &calib, g.slack)?;
        notes.push(format!(
            "gronwall: C_GN = {:.6}, a = {:.6}, L_sigma = {:.6}, L_g = {:.6}",
            calib.gn_constant, calib.a, calib.sigma_lipschitz, calib.l_g
        ));
        checks.push(report.check);
    }
    if c.identities.enabled {
        checks.extend(estimates::identity_suite(&grid, c.identities.trials, c.identities.seed, &c.identities.tolerances)?);
    }
    if c.noise_norms.enabled {
        checks.extend(estimates::noise_norm_checks(&spec, &grid, c.noise_norms.states, c.noise_norms.seed)?);
    }
    if c.bdg.enabled {
        let b = &c.bdg;
        let report = estimates::bdg_report(
            &init.v,
            &spec,
            b.q,
            &b.m_list,
            &b.settings(),
            b.monitors,
            &MonteCarlo {
                n_paths: b.paths,
                seed: mc.seed,
            },
            b.tolerance,
        )?;
        match report.skipped {
            Some(why) => notes.push(format!("bdg: skipped ({why})")),
            None => {
                for k in &report.constants {
                    notes.push(format!(
                        "bdg: N={} T={} m={} C={:.6} +- {:.6}",
                        k.n, k.t_end, k.m, k.constant, k.stderr
                    ));
                }
                checks.extend(report.checks);
            }
        }
    }
    Ok(Outcome {
        stats,
        checks,
        snapshots,
        notes,
    })
}

fn seeds(cfg: &ExperimentConfig) -> BTreeMap<String, u64> {
    let mut s = BTreeMap::from([
        ("base_seed".to_string(), cfg.mc.base_seed),
        ("n_paths".to_string(), cfg.mc.n_paths as u64),
    ]);
    if let crate::config::InitialConfig::Random { seed, .. } = cfg.initial {
        s.insert("initial_seed".into(), seed);
    }
    if cfg.checks.identities.enabled {
        s.insert("identities_seed".into(), cfg.checks.identities.seed);
    }
    if cfg.checks.gronwall.enabled {
        s.insert("perturbation_seed".into(), cfg.checks.gronwall.perturbation_seed);
    }
    if cfg.checks.noise_norms.enabled {
        s.insert("noise_norms_seed".into(), cfg.checks.noise_norms.seed);
    }
    s
}

fn print_checks(checks: &[CheckResult]) {
    for c in checks {
        eprintln!(
            "{} {:<40} observed {:<12.6e} bound {:.6e}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.observed,
            c.bound
        );
    }
}

fn cmd_run(a: RunArgs) -> Result<bool> {
    let mut cfg = load_config(&a.config)?;
    if let Some(s) = a.seed {
        cfg.mc.base_seed = s;
    }
    if let Some(p) = a.paths {
        cfg.mc.n_paths = p;
    }
    if let Some(o) = &a.out {
        cfg.output.directory = o.to_string_lossy().into_owned();
    }
    cfg.validate()?;
    let dir = PathBuf::from(&cfg.output.directory);
    output::ensure_target(&dir, a.force)?;
    let outcome = execute(&cfg)?;
    let mut extra = vec![OutputFile::new("resolved_config.json", cfg.resolved_json())];
    extra.extend(outcome.snapshots);
    output::write_outputs(&dir, &outcome.stats, &outcome.checks, extra, &cfg.hash(), seeds(&cfg), a.force)?;
    for n in &outcome.notes {
        eprintln!("{n}");
    }
    print_checks(&outcome.checks);
    eprintln!("wrote {}", dir.display());
    Ok(outcome.checks.iter().all(|c| c.passed))
}

fn cmd_identities(n: usize, trials: usize, seed: u64) -> Result<bool> {
    let grid = SpectralGrid::new(n, 2.0 * std::f64::consts::PI)?;
    let checks = estimates::identity_suite(&grid, trials, seed, &IdentityTolerances::default())?;
    print!("{}", output::checks_json(&checks));
    Ok(checks.iter().all(|c| c.passed))
}

fn read(dir: &Path, name: &str) -> Result<String> {
    let path = dir.join(name);
    std::fs::read_to_string(&path).map_err(|e| VortexError::io(path.display().to_string(), e))
}

fn cmd_report(dir: &Path, format: Format) -> Result<bool> {
    let rows = output::parse_stats_csv(&read(dir, output::STATS_FILE)?)?;
    let checks = output::parse_checks_json(&read(dir, output::CHECKS_FILE)?)?;
    let completed: Vec<_> = rows.iter().filter(|r| r.status == "completed").collect();
    let summaries: Vec<estimates::Summary> = (0..FUNCTIONALS.len())
        .map(|i| estimates::summarize(&completed.iter().map(|r| r.values[i]).collect::<Vec<_>>()))
        .collect();
    let passed = checks.iter().all(|c| c.passed);
    match format {
        Format::Text => {
            println!("paths: {} ({} completed)", rows.len(), completed.len());
            for (name, s) in FUNCTIONALS.iter().zip(&summaries) {
                println!("{name:<14} mean {:<14.6e} stderr {:.3e}", s.mean, s.stderr);
            }
            for c in &checks {
                println!(
                    "{} {:<40} observed {:<12.6e} bound {:.6e}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.observed,
                    c.bound
                );
            }
        }
        Format::Json => {
            let functionals: serde_json::Map<String, serde_json::Value> = FUNCTIONALS
                .iter()
                .zip(&summaries)
                .map(|(n, s)| (n.to_string(), serde_json::json!({"mean": s.mean, "stderr": s.stderr})))
                .collect();
            let doc = serde_json::json!({
                "n_paths": rows.len(),
                "completed": completed.len(),
                "functionals": functionals,
                "checks": checks,
                "passed": passed,
            });
            println!("{}", serde_json::to_string_pretty(&doc).expect("report serializes"));
        }
        Format::Csv => {
            println!("functional,mean,stderr,n");
            for (name, s) in FUNCTIONALS.iter().zip(&summaries) {
                println!("{name},{},{},{}", s.mean, s.stderr, completed.len());
            }
        }
    }
    Ok(passed)
}

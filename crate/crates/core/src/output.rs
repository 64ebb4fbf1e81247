//! Output files: `stats.csv`, `checks.json`, extra artifacts and a
//! `manifest.json` tying them to the config hash and seeds. Every file is
//! written to a temporary name and renamed into place.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Result, VortexError};
use crate::estimates::CheckResult;
use crate::stats::{TrajectoryStats, FUNCTIONALS};

pub const STATS_FILE: &str = "stats.csv";
pub const CHECKS_FILE: &str = "checks.json";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const STATS_HEADER: &str =
    "path_index,sup_v_l2sq,int_grad_v,sup_xi_lq,sup_beta_l2,int_grad_beta,sup_beta_lq,status";

pub fn stats_csv(stats: &[TrajectoryStats]) -> String {
    let mut out = String::from(STATS_HEADER);
    out.push('\n');
    for (i, s) in stats.iter().enumerate() {
        out.push_str(&i.to_string());
        for v in s.functionals() {
            out.push(',');
            out.push_str(&v.to_string());
        }
        out.push(',');
        out.push_str(s.status.as_str());
        out.push('\n');
    }
    out
}

/// One parsed row of `stats.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct StatsRow {
    pub path_index: usize,
    pub values: [f64; 6],
    pub status: String,
}

pub fn parse_stats_csv(text: &str) -> Result<Vec<StatsRow>> {
    let bad = |line: usize, why: &str| VortexError::Config(format!("{STATS_FILE} line {line}: {why}"));
    let mut lines = text.lines();
    if lines.next() != Some(STATS_HEADER) {
        return Err(bad(1, "unexpected header"));
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, line)| {
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != FUNCTIONALS.len() + 2 {
                return Err(bad(i + 2, "wrong number of columns"));
            }
            let path_index = cols[0].parse().map_err(|_| bad(i + 2, "bad path index"))?;
            let mut values = [0.0; 6];
            for (v, c) in values.iter_mut().zip(&cols[1..7]) {
                *v = c.parse().map_err(|_| bad(i + 2, "bad number"))?;
            }
            Ok(StatsRow {
                path_index,
                values,
                status: cols[7].to_string(),
            })
        })
        .collect()
}

pub fn checks_json(checks: &[CheckResult]) -> String {
    let mut s = serde_json::to_string_pretty(checks).expect("checks serialize");
    s.push('\n');
    s
}

pub fn parse_checks_json(text: &str) -> Result<Vec<CheckResult>> {
    serde_json::from_str(text).map_err(|e| VortexError::Config(format!("{CHECKS_FILE}: {e}")))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub name: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub config_hash: String,
    pub seeds: BTreeMap<String, u64>,
    pub files: Vec<FileEntry>,
}

/// A file to write, by path relative to the output directory.
#[derive(Debug, Clone)]
pub struct OutputFile {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl OutputFile {
    pub fn new(name: impl Into<String>, bytes: impl Into<Vec<u8>>) -> Self {
        Self {
            name: name.into(),
            bytes: bytes.into(),
        }
    }
}

/// Fails if `dir` exists and is not an empty directory, unless `force`.
pub fn ensure_target(dir: &Path, force: bool) -> Result<()> {
    if !dir.exists() {
        return Ok(());
    }
    if !dir.is_dir() {
        return Err(VortexError::param("output.directory", format!("{} is not a directory", dir.display())));
    }
    let empty = fs::read_dir(dir)
        .map_err(|e| VortexError::io(dir.display().to_string(), e))?
        .next()
        .is_none();
    if !empty && !force {
        return Err(VortexError::param(
            "output.directory",
            format!("{} already exists; pass --force to overwrite", dir.display()),
        ));
    }
    Ok(())
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let ctx = |e| VortexError::io(path.display().to_string(), e);
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(ctx)?;
    }
    let name = path.file_name().expect("file path").to_string_lossy();
    let tmp: PathBuf = path.with_file_name(format!(".{name}.tmp"));
    fs::write(&tmp, bytes).map_err(|e| VortexError::io(tmp.display().to_string(), e))?;
    fs::rename(&tmp, path).map_err(ctx)
}

/// Writes `stats.csv`, `checks.json`, the `extra` files and finally
/// `manifest.json`.
pub fn write_outputs(
    dir: &Path,
    stats: &[TrajectoryStats],
    checks: &[CheckResult],
    extra: Vec<OutputFile>,
    config_hash: &str,
    seeds: BTreeMap<String, u64>,
    force: bool,
) -> Result<Manifest> {
    ensure_target(dir, force)?;
    let mut files = vec![
        OutputFile::new(STATS_FILE, stats_csv(stats)),
        OutputFile::new(CHECKS_FILE, checks_json(checks)),
    ];
    files.extend(extra);
    let mut entries = Vec::with_capacity(files.len());
    for f in &files {
        write_atomic(&dir.join(&f.name), &f.bytes)?;
        entries.push(FileEntry {
            name: f.name.clone(),
            bytes: f.bytes.len() as u64,
            sha256: hex::encode(Sha256::digest(&f.bytes)),
        });
    }
    let manifest = Manifest {
        tool: "vortex".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config_hash: config_hash.into(),
        seeds,
        files: entries,
    };
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    write_atomic(&dir.join(MANIFEST_FILE), text.as_bytes())?;
    Ok(manifest)
}

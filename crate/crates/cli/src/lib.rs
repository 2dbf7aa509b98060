//! Configuration-driven experiment runner for `degenpara-core`.

pub mod config;
pub mod error;
pub mod experiments;
pub mod report;

use std::path::Path;

use rayon::prelude::*;

pub use config::{ExperimentConfig, Kind};
pub use error::{CliError, Result};
pub use report::{KindEntry, Status};

use report::KindDir;

/// Outcome of a batch of experiment kinds.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub entries: Vec<KindEntry>,
}

impl RunSummary {
    pub fn all_passed(&self) -> bool {
        self.entries.iter().all(|e| e.status == Status::Pass)
    }

    /// One line per failed check or errored kind.
    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        for e in &self.entries {
            if let Some(err) = &e.error {
                out.push(format!("{}: error: {err}", e.kind));
            }
            out.extend(e.failures.iter().map(|f| format!("{}: {f}", e.kind)));
        }
        out
    }
}

fn run_one(kind: Kind, cfg: &ExperimentConfig, out: &Path) -> Result<KindEntry> {
    let mut dir = KindDir::create(out, kind.name())?;
    let (rows, error) = match experiments::run_kind(kind, cfg, &mut dir) {
        Ok(rows) => (rows, None),
        Err(e @ CliError::Io(..)) => return Err(e),
        Err(e) => (Vec::new(), Some(e.to_string())),
    };
    dir.write_checks(&rows)?;
    let failures: Vec<String> = rows
        .iter()
        .filter(|r| r.verdict.is_failure())
        .map(|r| r.to_string())
        .collect();
    let status = match (&error, failures.is_empty()) {
        (Some(_), _) => Status::Error,
        (None, true) => Status::Pass,
        (None, false) => Status::Fail,
    };
    Ok(KindEntry {
        kind: kind.name().to_string(),
        status,
        checks: rows.len(),
        failures,
        files: dir.files,
        error,
    })
}

/// Runs the kinds concurrently, each into `out/<kind>/`, then writes
/// `out/manifest.toml`.
pub fn run(cfg: &ExperimentConfig, kinds: &[Kind], out: &Path) -> Result<RunSummary> {
    if kinds.is_empty() {
        return Err(CliError::Config("no experiment kinds selected".into()));
    }
    let mut unique = kinds.to_vec();
    unique.dedup();
    std::fs::create_dir_all(out).map_err(|e| CliError::Io(out.to_path_buf(), e))?;
    let entries = unique
        .par_iter()
        .map(|&k| run_one(k, cfg, out))
        .collect::<Result<Vec<_>>>()?;
    report::write_manifest(out, cfg, &entries)?;
    Ok(RunSummary { entries })
}

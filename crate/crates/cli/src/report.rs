//! Output files: check CSVs, free-form tables, grid dumps and the manifest.

use std::fs;
use std::path::{Path, PathBuf};

use degenpara_core::CheckRow;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};

/// Output directory of one experiment kind.
pub struct KindDir {
    pub path: PathBuf,
    pub files: Vec<String>,
}

impl KindDir {
    pub fn create(root: &Path, name: &str) -> Result<Self> {
        let path = root.join(name);
        fs::create_dir_all(&path).map_err(|e| CliError::Io(path.clone(), e))?;
        Ok(KindDir {
            path,
            files: Vec::new(),
        })
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> Result<()> {
        let p = self.path.join(name);
        fs::write(&p, text).map_err(|e| CliError::Io(p, e))?;
        self.files.push(name.to_string());
        Ok(())
    }

    /// Writes a CSV with a header row; every record must match its width.
    pub fn write_csv<H, R>(&mut self, name: &str, header: &[H], records: R) -> Result<()>
    where
        H: AsRef<str>,
        R: IntoIterator<Item = Vec<String>>,
    {
        let p = self.path.join(name);
        let mut w = csv::Writer::from_path(&p)?;
        w.write_record(header.iter().map(|h| h.as_ref()))?;
        for r in records {
            w.write_record(&r)?;
        }
        w.flush().map_err(|e| CliError::Io(p, e))?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn write_checks(&mut self, rows: &[CheckRow]) -> Result<()> {
        self.write_csv("checks.csv", &CheckRow::CSV_HEADER, rows.iter().map(|r| r.csv_record()))
    }

    pub fn file_path(&mut self, name: &str) -> PathBuf {
        self.files.push(name.to_string());
        self.path.join(name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

#[derive(Debug, Clone, Serialize)]
pub struct KindEntry {
    pub kind: String,
    pub status: Status,
    pub checks: usize,
    pub failures: Vec<String>,
    pub files: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    created: String,
    tool_version: &'static str,
    experiments: &'a [KindEntry],
    config: &'a ExperimentConfig,
}

pub fn write_manifest(root: &Path, config: &ExperimentConfig, entries: &[KindEntry]) -> Result<PathBuf> {
    let m = Manifest {
        created: chrono::Utc::now().to_rfc3339(),
        tool_version: env!("CARGO_PKG_VERSION"),
        experiments: entries,
        config,
    };
    let text = toml::to_string(&m)?;
    let p = root.join("manifest.toml");
    fs::write(&p, text).map_err(|e| CliError::Io(p.clone(), e))?;
    Ok(p)
}

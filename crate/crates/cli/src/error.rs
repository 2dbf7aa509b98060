use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("configuration syntax: {0}")]
    Toml(#[from] toml::de::Error),

    #[error("unknown experiment kind `{0}`")]
    UnknownKind(String),

    #[error("{}: {}", .0.display(), .1)]
    Io(PathBuf, #[source] std::io::Error),

    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),

    #[error("manifest serialization: {0}")]
    Manifest(#[from] toml::ser::Error),

    #[error(transparent)]
    Core(#[from] degenpara_core::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] dog_lcu::Error),
    #[error("cannot read config {path}: {source}")]
    ReadConfig { path: PathBuf, source: std::io::Error },
    #[error("malformed config {path}: {source}")]
    ParseConfig { path: PathBuf, source: toml::de::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("cannot serialize report: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::ParseConfig { .. } => 2,
            CliError::Core(dog_lcu::Error::Io(_)) => 3,
            CliError::Core(_) => 2,
            CliError::ReadConfig { .. } | CliError::Write { .. } | CliError::Json(_) => 3,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

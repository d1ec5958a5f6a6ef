use std::path::{Path, PathBuf};

use dykstra_core::{DiagnosticsError, EngineError, RateError, SetError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error at line {line}, column {column}: {message}")]
    Config {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid config field `{field}`: {message}")]
    Invalid { field: String, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("unknown scenario `{0}` (known: orthant2, orthant3, halfdisc, twolines, affine3)")]
    UnknownScenario(String),
    #[error("usage: {0}")]
    Usage(String),
    #[error("trace file line {line}: {message}")]
    Trace { line: usize, message: String },
    #[error(transparent)]
    Set(#[from] SetError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Diagnostics(#[from] DiagnosticsError),
    #[error(transparent)]
    Rate(#[from] RateError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }
}

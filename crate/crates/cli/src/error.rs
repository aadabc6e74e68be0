use std::path::PathBuf;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] binrate_core::Error),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("serialization failed: {0}")]
    Json(#[from] serde_json::Error),

    #[error("{0}")]
    Usage(String),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(_) => "computation",
            CliError::Config(_) => "config",
            CliError::Io { .. } => "io",
            CliError::Json(_) => "serialization",
            CliError::Usage(_) => "usage",
        }
    }

    /// Single-line JSON record for standard error.
    pub fn record(&self) -> String {
        #[derive(Serialize)]
        struct Record<'a> {
            error: &'a str,
            message: String,
            version: &'a str,
        }
        serde_json::to_string(&Record {
            error: self.kind(),
            message: self.to_string(),
            version: env!("CARGO_PKG_VERSION"),
        })
        .unwrap_or_else(|_| format!("{{\"error\":\"{}\"}}", self.kind()))
    }
}

pub fn io_error(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
    let path = path.into();
    move |source| CliError::Io { path, source }
}

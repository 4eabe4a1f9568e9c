use std::path::PathBuf;

use thiserror::Error;

/// Harness failures, grouped into categories with distinct exit codes.
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("cannot read config {path}: {source}")]
    ConfigMissing {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed config {path}: {message}")]
    ConfigSyntax { path: PathBuf, message: String },
    #[error("invalid config value `{field}`: {reason}")]
    ConfigInvalid { field: String, reason: String },
    #[error("I/O error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("CSV error at {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("computation failed: {0}")]
    Compute(#[from] papr_core::Error),
    #[error("worker pool: {0}")]
    Pool(String),
}

impl HarnessError {
    pub fn category(&self) -> &'static str {
        match self {
            HarnessError::ConfigMissing { .. } => "config-missing",
            HarnessError::ConfigSyntax { .. } => "config-syntax",
            HarnessError::ConfigInvalid { .. } => "config-invalid",
            HarnessError::Io { .. } | HarnessError::Csv { .. } => "io",
            HarnessError::Compute(_) => "compute",
            HarnessError::Pool(_) => "runtime",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::ConfigMissing { .. } => 3,
            HarnessError::ConfigSyntax { .. } => 4,
            HarnessError::ConfigInvalid { .. } => 5,
            HarnessError::Io { .. } | HarnessError::Csv { .. } => 6,
            HarnessError::Compute(_) => 7,
            HarnessError::Pool(_) => 8,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;

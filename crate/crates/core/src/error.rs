use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = WnsError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum WnsError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("Picard iteration did not contract after {iterations} iterations (last ratio {last_ratio:.3e}, last distance {last_distance:.3e})")]
    ContractionFailure {
        iterations: usize,
        last_ratio: f64,
        last_distance: f64,
    },

    #[error("config error at key `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("parse error in {path} at line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl WnsError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        WnsError::Io {
            path: path.into(),
            source,
        }
    }
}

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid emotion label code {0} (expected 0..=4)")]
    InvalidLabel(i64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("insufficient samples: need at least {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("invalid band: {0}")]
    InvalidBand(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("row alignment failed for {modality}: expected {expected} rows, got {got}")]
    Alignment {
        modality: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("cannot shrink {src} rows to {dst}: downsampling rows is not supported")]
    DownsampleNotSupported { src: usize, dst: usize },

    #[error("empty input: {0}")]
    Empty(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("cache does not belong to the current model state")]
    StaleCache,

    #[error("{path}: {err}")]
    Io { path: PathBuf, err: std::io::Error },

    #[error("{path}: {msg}")]
    Format { path: PathBuf, msg: String },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// Coarse classification used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Validation,
    Io,
    Numerical,
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            err: source,
        }
    }

    pub fn format(path: impl Into<PathBuf>, msg: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            msg: msg.into(),
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Io { .. } | Error::Format { .. } | Error::Json(_) => ErrorClass::Io,
            Error::NonFinite(_) => ErrorClass::Numerical,
            _ => ErrorClass::Validation,
        }
    }
}

use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by loading, validating and analysing embedding spaces.
#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// The bytes on disk do not follow the expected layout.
    #[error("format error: {0}")]
    Format(String),

    /// Two pieces of input disagree (header vs payload, sidecar vs matrix, ranges vs rows).
    #[error("consistency error: {0}")]
    Consistency(String),

    /// Values are present but invalid (NaN/Inf, out-of-range scores, zero-norm vectors).
    #[error("data error: {0}")]
    Data(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("transform fit failed: {0}")]
    Fit(String),

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),

    #[error("numeric failure: {0}")]
    Numeric(String),
}

/// Coarse error classes, used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Io,
    Validation,
    Numeric,
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Io { .. } => ErrorClass::Io,
            Error::UndefinedCorrelation(_) | Error::Numeric(_) => ErrorClass::Numeric,
            _ => ErrorClass::Validation,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

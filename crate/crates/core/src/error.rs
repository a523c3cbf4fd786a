use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the library and the command-line front end.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not Hermitian (residual {residual:e})")]
    Hermiticity { residual: f64 },

    #[error("group error: {0}")]
    Group(String),

    #[error("invalid tolerance: {0}")]
    Tolerance(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid probability vector: {0}")]
    InvalidProbability(String),

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("invalid operation: {0}")]
    InvalidMap(String),

    #[error("invalid instrument: {0}")]
    InvalidInstrument(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("instrument is not W-covariant (residual {residual:e})")]
    NotCovariant { residual: f64 },

    #[error("invalid spin frame: {0}")]
    Frame(String),

    #[error("usage: {0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

impl Error {
    /// Process exit code for the command-line front end: 1 for I/O, parse
    /// and usage problems, 2 when an input violates a mathematical invariant.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } | Error::Parse { .. } | Error::Usage(_) => 1,
            Error::Group(_) | Error::Frame(_) => 1,
            Error::Dimension(_) | Error::Tolerance(_) => 1,
            _ => 2,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

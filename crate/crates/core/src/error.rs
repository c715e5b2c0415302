use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the fitting library.
#[derive(Debug, Error)]
pub enum Error {
    /// Caller passed arguments that do not fit together (dimension mismatch, bad flag).
    #[error("usage error: {0}")]
    Usage(String),

    /// Parameter vector outside the domain a model family accepts.
    #[error("domain error: {0}")]
    Domain(String),

    /// Parameters describe a model with no extent (zero length, zero scale, ...).
    #[error("degenerate model: {0}")]
    Degenerate(String),

    /// Not enough distinct data points to define the data resolution.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// Invalid optimizer or estimator configuration.
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    /// Input file is not in the expected binary/text format.
    #[error("format error: {0}")]
    Format(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error in {}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

/// Process exit codes of the command-line tool.
pub mod exit {
    pub const USAGE: i32 = 2;
    pub const DATA: i32 = 3;
    pub const IO: i32 = 4;
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::Config(_) => exit::USAGE,
            Error::Io { .. } => exit::IO,
            _ => exit::DATA,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the simulator.
#[derive(Debug, Error)]
pub enum Error {
    /// A structural parameter is outside its admissible bounds.
    #[error("parameter `{name}`: {message}")]
    Parameter { name: &'static str, message: String },

    /// A value lies outside the mathematical domain of an operation.
    #[error("domain error for `{name}`: {message}")]
    Domain { name: &'static str, message: String },

    /// Input dimensions do not match (e.g. genotype length vs. locus count).
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A normalization range collapsed to a point.
    #[error("degenerate range: {0}")]
    DegenerateRange(String),

    /// Not enough data points for the requested analysis.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// Configuration parse or validation failure.
    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn parameter(name: &'static str, message: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            message: message.into(),
        }
    }

    pub fn domain(name: &'static str, message: impl Into<String>) -> Self {
        Error::Domain {
            name,
            message: message.into(),
        }
    }

    /// Process exit code for the CLI: 2 for configuration problems, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Parameter { .. } => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

//! Error types shared across the crate.

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A symbol lies outside the declared alphabet.
    #[error("symbol {symbol} out of range for alphabet of size {alphabet_size}")]
    SymbolOutOfRange { symbol: u64, alphabet_size: u64 },

    /// An input point lies outside the domain of a partition scheme.
    #[error("domain violation: {0}")]
    Domain(String),

    /// A partition scheme was paired with an incompatible reference measure
    /// or source, or a parameter combination is invalid.
    #[error("configuration error: {0}")]
    Config(String),

    /// An invalid model or estimator parameter.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A computation could not produce a finite, meaningful result.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// The requested operation is not defined for the given model.
    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for the CLI: 1 for configuration problems,
    /// 2 for numerical or data failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidParameter(_) | Error::Parse(_) => 1,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

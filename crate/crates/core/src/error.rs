//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by simulation, training, and data handling.
///
/// Variants are grouped by who is at fault rather than by module: `Config`
/// for invalid settings caught before any work starts, `Usage` for calls
/// that violate an API contract (bad index, dimension mismatch), `Data` for
/// problems in user-supplied inputs, `Numeric` for breakdowns detected
/// during computation, and `Format` for incompatible serialized artifacts.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid length {0} is not a power of two >= 8")]
    BadGridLength(usize),
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("frequency band overflow: {0}")]
    BandOverflow(String),
    #[error("grid geometry mismatch")]
    GridMismatch,
    #[error("multiplier symbol returned a non-finite value at xi = {0}")]
    NonFiniteSymbol(f64),
    #[error("profile certification failed: {0}")]
    Certification(String),
    #[error("precision exhausted: {0}")]
    Precision(String),
    #[error("fit error: {0}")]
    Fit(String),
    #[error("unknown experiment descriptor: {0}")]
    UnknownDescriptor(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

//! Error type shared across the toolkit.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite entry at index {0}")]
    NonFinite(usize),

    #[error("iteration did not converge within {iterations} steps (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("enumeration guard exceeded: {0}")]
    GuardExceeded(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("ground truth x* required but not present")]
    MissingGroundTruth,

    #[error("certificate is not valid: {0}")]
    InvalidCertificate(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

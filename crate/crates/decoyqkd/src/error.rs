//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by distribution constructors, estimators, optimizers and
/// the session runner.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violates its domain (probability out of range, negative
    /// bandwidth, parametric gain at or above one, ...).
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    /// An observed rate falls outside the range the forward model can
    /// produce, so no channel efficiency reproduces it.
    #[error("observed rate {observed} outside invertible range [{lo}, {hi}]")]
    OutOfRange { observed: f64, lo: f64, hi: f64 },

    /// A statistical decision was requested on a ledger without data.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// An iterative search exhausted its iteration budget, or a pre-scan
    /// found a landscape the search cannot handle.
    #[error("non-convergence: {0}")]
    NonConvergence(String),

    /// Configuration file could not be parsed or failed validation.
    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParam(msg.into())
    }
}

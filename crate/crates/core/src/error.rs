use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A model or table fails a structural precondition (causality,
    /// admissibility, integrability).
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// Input data carry no information for an estimator (zero variance,
    /// zero variation).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// Not enough samples for the requested estimate.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// A numerical routine failed (e.g. Cholesky after jitter).
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

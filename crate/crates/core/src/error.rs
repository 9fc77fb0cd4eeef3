use alloc::string::String;

/// Errors raised by the estimators and their numerical building blocks.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("root is not bracketed: f({lo}) and f({hi}) have the same sign")]
    NoBracket { lo: f64, hi: f64 },
    #[error("no convergence after {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("empty data")]
    EmptyData,
    #[error("insufficient data: need at least {needed} observations, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("all {n} observations fall below the censoring threshold {threshold} mm")]
    AllCensored { n: usize, threshold: f64 },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

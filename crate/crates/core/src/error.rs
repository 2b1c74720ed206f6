use thiserror::Error;

use crate::coefficients::CoefficientState;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A formula was evaluated outside the set where it is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// Inputs are individually valid but inconsistent with each other
    /// (mismatched windows, grids that are too short, ...).
    #[error("invalid argument: {0}")]
    Argument(String),

    /// The adaptive integrator gave up; the last accepted state is kept.
    #[error("integration failed at t = {t}: {reason}")]
    Integration {
        t: f64,
        reason: String,
        last_good: Box<CoefficientState>,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn argument(msg: impl Into<String>) -> Error {
    Error::Argument(msg.into())
}

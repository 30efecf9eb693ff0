use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("power iteration did not converge after {iterations} iterations (residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("alpha enumeration over {pairs} AP-device pairs exceeds the limit of {limit}")]
    Capacity { pairs: usize, limit: usize },

    #[error("transfer efficiency undefined: total transmit power is zero")]
    UndefinedRatio,

    #[error("scenario {path}: {message}")]
    Scenario { path: PathBuf, message: String },

    #[error("infeasible allocation: {0}")]
    Infeasible(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

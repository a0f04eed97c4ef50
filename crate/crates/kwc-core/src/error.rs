//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numeric failure in {what}: achieved error {achieved:e}, requested {requested:e}")]
    NumericFailure {
        what: &'static str,
        achieved: f64,
        requested: f64,
    },

    #[error("degenerate slice: line (x=({x:?}), nu=({nu:?})) runs along a jump segment")]
    DegenerateSlice { x: [f64; 2], nu: [f64; 2] },

    #[error(
        "epsilon too large: supports of segments {first} and {second} overlap or leave the domain"
    )]
    EpsilonTooLarge { first: usize, second: usize },

    #[error("property violation: {0}")]
    PropertyViolation(String),

    #[error("non-convergence in {what} after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

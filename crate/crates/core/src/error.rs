use std::io;

use thiserror::Error;

/// Errors raised by the generators and their building blocks.
#[derive(Debug, Error)]
pub enum Error {
    /// Input violates a documented precondition (ordering, ranges, parity, ...).
    #[error("invalid input: {0}")]
    Validation(String),

    /// A value outside the domain of a function, e.g. a uniform variate not in `[0, 1)`.
    #[error("domain error: {0}")]
    Domain(String),

    /// A container was used against its access protocol.
    #[error("usage error: {0}")]
    Usage(String),

    /// A randomized repair loop gave up before producing a valid object.
    #[error("{stage} did not converge: {remaining} defects remain after {rounds} rounds")]
    LasVegas {
        stage: &'static str,
        remaining: u64,
        rounds: u32,
    },

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Validation(msg.into()))
}

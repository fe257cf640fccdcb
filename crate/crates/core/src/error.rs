use thiserror::Error;

use crate::multiss::InfeasibleReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("field elements belong to different moduli")]
    ModulusMismatch,

    #[error("division by zero")]
    DivisionByZero,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid modulus: {0}")]
    InvalidModulus(String),

    /// A precondition on the arguments was violated.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("insufficient shares: have {have}, need {need}")]
    InsufficientShares { have: usize, need: usize },

    #[error("epoch mismatch: found epochs {found:?}")]
    EpochMismatch { found: Vec<u64> },

    #[error("Birkhoff system is singular")]
    Unsolvable,

    #[error("no solvable quorum among the supplied shares")]
    NoQuorum,

    #[error("reconstruction infeasible: {0}")]
    Infeasible(InfeasibleReport),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("corrupt data: {0}")]
    Corrupt(String),

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

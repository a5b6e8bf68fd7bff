use thiserror::Error;

/// Errors raised by the numeric kernels.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid range [{lo}, {hi}): {reason}")]
    InvalidRange {
        lo: u64,
        hi: u64,
        reason: &'static str,
    },

    #[error("range [{lo}, {hi}) exceeds the sieve memory budget")]
    RangeTooLarge { lo: u64, hi: u64 },

    #[error("{p} is not prime")]
    NotPrime { p: u64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("series truncation N = {requested} exceeds the limit {limit}")]
    TruncationLimit { requested: u32, limit: u32 },

    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;

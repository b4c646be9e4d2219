use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("k must be at least 1")]
    ZeroK,

    #[error("primorial of the first {0} primes does not fit in 64 bits (k <= 15 supported)")]
    BasisTooLarge(usize),

    #[error("k = {0} is not supported here (built-in data exists for k = 3 and k = 4)")]
    UnsupportedK(usize),

    #[error("malformed congruence condition: {0}")]
    MalformedCondition(String),

    #[error("table parse error: {0}")]
    TableParse(#[from] serde_json::Error),

    #[error("table invariant violated at {location}: {reason}")]
    TableInvariant { location: String, reason: String },

    #[error("invalid window [{lo}, {hi}]: lo must not exceed hi")]
    InvalidWindow { lo: i64, hi: i64 },

    #[error("{m} lies outside the window [{lo}, {hi}]")]
    OutsideWindow { m: i64, lo: i64, hi: i64 },

    #[error("n = {n} outside the supported range [{lo}, {hi}]")]
    OutOfRange { n: i64, lo: i64, hi: i64 },

    #[error("search universe too large: {0} distinct prime supports (at most 256)")]
    UniverseTooLarge(usize),

    #[error("internal consistency check failed: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

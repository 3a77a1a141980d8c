use num_bigint::BigUint;
use thiserror::Error;

/// Errors raised by the height machinery.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{0} is not prime")]
    NotPrime(BigUint),

    #[error("could not factor {0}")]
    Factorization(String),

    #[error("orbit reached the degenerate pair (0, 0) at step {0}")]
    DegenerateOrbit(u64),

    #[error("cap exceeded: {0}")]
    CapExceeded(String),

    #[error("p-adic precision exhausted at {digits} digits")]
    PrecisionExhausted { digits: usize },

    #[error("search region too large: {candidates} candidates exceed budget {budget}")]
    RegionTooLarge { candidates: u128, budget: u128 },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

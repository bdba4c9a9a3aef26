use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u32),
    #[error("unsupported field order {0}; supported orders are 2, 3, 4, 5, 7, 8, 9")]
    UnsupportedOrder(u64),
    #[error("field order {0} is not a perfect square")]
    NotSquare(u32),
    #[error("unsupported configuration: {0}")]
    UnsupportedConfig(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("index out of range: {0}")]
    OutOfRange(String),
    #[error("size bound exceeded: {what} is {size}, limit {limit}")]
    BoundExceeded {
        what: &'static str,
        size: u128,
        limit: u128,
    },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("non-integral result: {0}")]
    NonIntegral(String),
    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn bound(what: &'static str, size: u128, limit: u128) -> Result<()> {
    if size > limit {
        Err(Error::BoundExceeded { what, size, limit })
    } else {
        Ok(())
    }
}

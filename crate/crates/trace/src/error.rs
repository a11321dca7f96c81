use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("gcd({n}, {level}) > 1: traces are only implemented for n coprime to the level")]
    NotCoprime { n: u64, level: u64 },
    #[error("the newspace of level {level} and weight {weight} is empty")]
    EmptyFamily { level: u64, weight: u32 },
    #[error("{what} exceeds its cap: {reason}")]
    CapExceeded { what: &'static str, reason: String },
    #[error("trace engine failure: {0}")]
    Engine(String),
    #[error("hurwitz cache line {line}: {reason}")]
    CacheFormat { line: usize, reason: String },
    #[error(transparent)]
    Core(#[from] stpair_core::Error),
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

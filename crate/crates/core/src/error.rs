use thiserror::Error;

/// Errors raised by the pair-correlation core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("angle {0} lies outside [0, 1]")]
    AngleOutOfRange(f64),

    #[error("normalized eigenvalue {0} violates the Deligne bound |a_p| <= 2")]
    DeligneBound(f64),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("test function `{0}` has no closed space-side form")]
    MissingSpaceForm(String),

    #[error("angle list has {angles} entries but the prime window holds {primes} primes")]
    LengthMismatch { angles: usize, primes: usize },

    #[error("no angle falls in the localization window; the counting statistic is undefined")]
    EmptyLocalWindow,

    #[error("unknown test function `{0}` (expected one of: fejer, raised-cosine, zero)")]
    UnknownTestFunction(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

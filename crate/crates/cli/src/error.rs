//! Command-line errors: a message, a one-line remediation hint, and an exit code.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    /// Bad flags, config keys or parameter values; exit status 2.
    Usage,
    /// Failures while computing or doing I/O; exit status 3.
    Runtime,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub kind: Kind,
    pub message: String,
    pub hint: String,
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn usage(message: impl Into<String>, hint: impl Into<String>) -> Self {
        CliError {
            kind: Kind::Usage,
            message: message.into(),
            hint: hint.into(),
        }
    }

    pub fn runtime(message: impl Into<String>, hint: impl Into<String>) -> Self {
        CliError {
            kind: Kind::Runtime,
            message: message.into(),
            hint: hint.into(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self.kind {
            Kind::Usage => 2,
            Kind::Runtime => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

fn adjust(name: &str) -> String {
    format!("adjust `{name}` (see --help for accepted values)")
}

impl From<stpair_core::Error> for CliError {
    fn from(e: stpair_core::Error) -> Self {
        use stpair_core::Error as E;
        let msg = e.to_string();
        match e {
            E::InvalidParameter { name: "psi", .. } => {
                Self::usage(msg, "pass --psi strictly between 0 and 1 and not 1/2, e.g. --psi 0.25")
            }
            E::InvalidParameter { name, .. } => Self::usage(msg, adjust(name)),
            E::UnknownTestFunction(_) => Self::usage(msg, "use fejer, raised-cosine or zero for --rho and --g"),
            E::MissingSpaceForm(_) => Self::usage(msg, "choose a built-in test function (fejer, raised-cosine)"),
            E::EmptyLocalWindow => Self::runtime(msg, "raise --x or lower --L so that some angle lies near psi"),
            E::AngleOutOfRange(_) | E::DeligneBound(_) | E::LengthMismatch { .. } => Self::runtime(
                msg,
                "the eigenvalue data is malformed; refetch it or check its normalization",
            ),
        }
    }
}

impl From<stpair_trace::Error> for CliError {
    fn from(e: stpair_trace::Error) -> Self {
        use stpair_trace::Error as E;
        let msg = e.to_string();
        match e {
            E::InvalidParameter { name, .. } => Self::usage(msg, adjust(name)),
            E::NotCoprime { .. } => Self::usage(msg, "choose n coprime to the level"),
            E::EmptyFamily { .. } => Self::usage(
                msg,
                "pick a level and weight with a nonempty newspace; `stpair dims` lists dimensions",
            ),
            E::CapExceeded { .. } => Self::usage(msg, "lower the offending parameter or raise --d-cap / --p-cap"),
            E::Engine(_) => Self::runtime(msg, "internal consistency failure; report it with the full command line"),
            E::CacheFormat { .. } => Self::runtime(
                msg,
                "delete the Hurwitz table under $STPAIR_CACHE_DIR/hurwitz or rebuild it with `stpair fetch --hurwitz N`",
            ),
            E::Core(e) => e.into(),
        }
    }
}

impl From<stpair_data::Error> for CliError {
    fn from(e: stpair_data::Error) -> Self {
        use stpair_data::Error as E;
        let msg = e.to_string();
        match e {
            E::InvalidParameter { name, .. } => Self::usage(msg, adjust(name)),
            E::Fetch { .. } => Self::runtime(
                msg,
                "check network access or set STPAIR_LMFDB_URL; a warm cache in $STPAIR_CACHE_DIR avoids the network",
            ),
            E::Schema { .. } => Self::runtime(
                msg,
                "the API response changed shape; point STPAIR_LMFDB_URL at a compatible endpoint",
            ),
            E::Validation { .. } => Self::runtime(
                msg,
                "the coefficient data failed validation; delete its cache entry and refetch",
            ),
            E::CacheCorrupt { .. } => Self::runtime(msg, "delete the cache entry and rerun"),
            E::Io { .. } => Self::runtime(msg, "check that the path exists and is writable"),
            E::Core(e) => e.into(),
            E::Trace(e) => e.into(),
        }
    }
}

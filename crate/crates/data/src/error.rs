use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("fetch of {url} failed and no cached copy exists: {reason}")]
    Fetch { url: String, reason: String },
    #[error("unexpected response schema: field `{field}`: {reason}")]
    Schema { field: String, reason: String },
    #[error("{label}: {reason}")]
    Validation { label: String, reason: String },
    #[error("cache entry {path} is corrupt: {reason}")]
    CacheCorrupt { path: PathBuf, reason: String },
    #[error("io error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] stpair_core::Error),
    #[error(transparent)]
    Trace(#[from] stpair_trace::Error),
}

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Error {
    let path = path.into();
    move |source| Error::Io { path, source }
}

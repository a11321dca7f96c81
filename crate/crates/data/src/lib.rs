//! Eigenform coefficient data: Ramanujan's Δ from its eta-product expansion,
//! rational newforms from the LMFDB API, and a checksummed on-disk cache.

pub mod cache;
pub mod error;
pub mod lmfdb;
pub mod series;

pub use cache::{CacheDir, CacheStatus};
pub use error::{Error, Result};
pub use lmfdb::{LmfdbClient, RemoteFormRef};
pub use series::{angles_from_series, delta_series, CoefficientSeries};

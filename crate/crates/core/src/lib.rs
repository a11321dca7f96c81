//! Local pair correlation of Hecke angles.
//!
//! Sato-Tate measure and Chebyshev identities ([`arith`]), Fourier-side test
//! functions and periodized kernels ([`kernels`]), per-form statistics
//! ([`paircorr`]) and Monte Carlo oracles ([`montecarlo`]).

pub mod arith;
pub mod error;
pub mod kernels;
pub mod montecarlo;
pub mod nufft;
pub mod paircorr;
pub mod quadrature;

pub use arith::{Angle, PrimeWindow};
pub use error::{Error, Result};
pub use kernels::{CoefficientTable, PeriodizedKernel, SpectralTestFunction};
pub use paircorr::{AngleSet, PairCorrConfig, PairCorrReport};

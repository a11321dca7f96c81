//! Exact Eichler–Selberg trace computations for `S_k(Γ₀(N))`: Hurwitz class
//! numbers, traces of Hecke operators on the full and new subspaces, dimensions,
//! family averages and small-family moments of the pair correlation statistic.

pub mod arith;
pub mod dims;
pub mod error;
pub mod family;
pub mod formula;
pub mod hurwitz;

pub use dims::{b1_and_dims, newspace_summary, NewspaceSummary};
pub use error::{Error, Result};
pub use family::{check_trace_estimate, extract_eigenvalues, family_avg, family_moments, EigenCaps, FamilyMoment};
pub use formula::{normalize, trace_tn_full, trace_tn_new, TraceValue};
pub use hurwitz::{hurwitz, HurwitzTable};

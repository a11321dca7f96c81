//! Command-line surface. Every parameter flag is optional here; defaults are
//! applied after merging with the config file (see [`crate::config`]).

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::IntList;
use crate::report::Format;

#[derive(Debug, Parser)]
#[command(name = "stpair", version, about = "Pair correlation statistics of Hecke angles")]
pub struct Cli {
    /// Worker threads; 1 gives bit-exact reports.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Record wall-clock time in the report (makes it non-reproducible).
    #[arg(long, global = true)]
    pub timing: bool,
    /// Output format [default: json].
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write the report here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// Flat `key = value` config file; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for randomized subcommands [default: 42].
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Randomized checks of the Chebyshev and Hecke product identities and the kernels.
    Identities(IdentitiesArgs),
    /// Convergence of T(g,rho)/4L to the Poisson limit.
    Kernel(KernelArgs),
    /// Per-form report for Delta or an LMFDB newform.
    Single(SingleArgs),
    /// Trace-formula family averages, estimates and exact small-family moments.
    Family(FamilyArgs),
    /// Monte Carlo Poisson and variance experiments.
    Mc(McArgs),
    /// Traces of Hecke operators on full and new cusp spaces.
    Trace(TraceArgs),
    /// Newspace dimensions and the dimension bound over ranges.
    Dims(DimsArgs),
    /// Fetch and cache LMFDB coefficients, or build the Hurwitz table.
    Fetch(FetchArgs),
}

/// Parameters of the smoothed statistic.
#[derive(Debug, Args)]
pub struct StatArgs {
    /// Localization point in (0,1), not 1/2 [default: 0.25].
    #[arg(long)]
    pub psi: Option<f64>,
    /// Kernel scale L [default depends on subcommand].
    #[arg(long = "L")]
    pub l: Option<usize>,
    /// Test function rho: fejer, raised-cosine, zero [default: fejer].
    #[arg(long)]
    pub rho: Option<String>,
    /// Test function g: fejer, raised-cosine, zero [default: fejer].
    #[arg(long)]
    pub g: Option<String>,
    /// Counting window parameter s [default: 1].
    #[arg(long)]
    pub s: Option<f64>,
}

#[derive(Debug, Args)]
pub struct IdentitiesArgs {
    /// Random cases per identity [default: 1000].
    #[arg(long)]
    pub trials: Option<usize>,
    /// Largest Chebyshev index drawn [default: 60, at most 200].
    #[arg(long = "index-cap")]
    pub index_cap: Option<u32>,
    /// Random angles per kernel scale [default: 100].
    #[arg(long = "kernel-points")]
    pub kernel_points: Option<usize>,
    /// Lattice terms on each side in the space-side kernel sum [default: 200000].
    #[arg(long = "lattice-terms")]
    pub lattice_terms: Option<usize>,
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    #[arg(long)]
    pub psi: Option<f64>,
    #[arg(long)]
    pub rho: Option<String>,
    #[arg(long)]
    pub g: Option<String>,
    /// Comma-separated L:M pairs [default: 50:1000,100:10000,200:100000,400:1000000].
    #[arg(long)]
    pub schedule: Option<String>,
}

#[derive(Debug, Args)]
pub struct SingleArgs {
    /// `delta` or `lmfdb:N.k.i` [default: delta].
    #[arg(long)]
    pub form: Option<String>,
    /// Primes up to x [default: 1000].
    #[arg(long)]
    pub x: Option<u64>,
    #[command(flatten)]
    pub stat: StatArgs,
    /// Truncate the G(n) series at n <= cap.
    #[arg(long = "n-cap")]
    pub n_cap: Option<usize>,
    /// Counting coordinates: angle or straightened [default: angle].
    #[arg(long)]
    pub counting: Option<String>,
}

#[derive(Debug, Args)]
pub struct FamilyArgs {
    /// Level N [default: 1].
    #[arg(long)]
    pub level: Option<u64>,
    /// Even weight k [default: 24].
    #[arg(long)]
    pub weight: Option<u32>,
    /// Indices n for family averages and trace estimates [default: 4,9,25].
    #[arg(long)]
    pub n: Option<IntList>,
    /// Error scale of the trace estimate: sqrt-level or four-nu [default: sqrt-level].
    #[arg(long = "error-scale")]
    pub error_scale: Option<String>,
    /// Primes up to x for exact moments [default: 19].
    #[arg(long)]
    pub x: Option<u64>,
    #[command(flatten)]
    pub stat: StatArgs,
    /// Largest newspace dimension for eigenvalue extraction [default: 3].
    #[arg(long = "d-cap")]
    pub d_cap: Option<u64>,
    /// Largest prime for eigenvalue extraction [default: 20].
    #[arg(long = "p-cap")]
    pub p_cap: Option<u64>,
}

#[derive(Debug, Args)]
pub struct McArgs {
    /// poisson or variance [default: poisson].
    #[arg(long)]
    pub experiment: Option<String>,
    /// Trials for the Poisson experiment [default: 100].
    #[arg(long)]
    pub trials: Option<usize>,
    /// Sample size for the Poisson experiment [default: 10000].
    #[arg(long)]
    pub n: Option<usize>,
    /// Ascending sample sizes for the variance experiment [default: 100,10000].
    #[arg(long)]
    pub sizes: Option<IntList>,
    /// Synthetic forms per size [default: 200].
    #[arg(long)]
    pub forms: Option<usize>,
    /// Variance runs, using seeds seed, seed+1, ... [default: 1].
    #[arg(long)]
    pub runs: Option<u64>,
    #[command(flatten)]
    pub stat: StatArgs,
}

#[derive(Debug, Args)]
pub struct TraceArgs {
    /// Level N [default: 1].
    #[arg(long)]
    pub level: Option<u64>,
    /// Even weight k [default: 12].
    #[arg(long)]
    pub weight: Option<u32>,
    /// Indices n, e.g. `2` or `1..20` [default: 2].
    #[arg(long)]
    pub n: Option<IntList>,
}

#[derive(Debug, Args)]
pub struct DimsArgs {
    /// Levels, e.g. `1..100` [default: 1..100].
    #[arg(long)]
    pub level: Option<IntList>,
    /// Even weights, e.g. `2..60:2` [default: 2..60:2].
    #[arg(long)]
    pub weight: Option<IntList>,
}

#[derive(Debug, Args)]
pub struct FetchArgs {
    /// Newform `N.k.i` or LMFDB label `N.k.a.x`.
    #[arg(long)]
    pub form: Option<String>,
    /// Number of coefficients [default: 100].
    #[arg(long)]
    pub count: Option<usize>,
    /// Build or load the Hurwitz class number table up to this bound.
    #[arg(long)]
    pub hurwitz: Option<u64>,
}

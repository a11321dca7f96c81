//! Subcommand implementations. Each resolves its parameters through
//! [`Params`], rejects unknown config keys, then computes an [`Outcome`].

mod engine;
mod family;
mod fetch;
mod identities;
mod kernel;
mod mc;
mod single;

use serde::Serialize;
use serde_json::Value;

use stpair_core::{PairCorrConfig, SpectralTestFunction};

use crate::args::{Command, StatArgs};
use crate::config::Params;
use crate::error::Result;
use crate::report::Outcome;

pub fn run(command: &Command, seed: Option<u64>, p: &mut Params) -> Result<Outcome> {
    match command {
        Command::Identities(a) => identities::run(a, seed, p),
        Command::Kernel(a) => kernel::run(a, p),
        Command::Single(a) => single::run(a, p),
        Command::Family(a) => family::run(a, p),
        Command::Mc(a) => mc::run(a, seed, p),
        Command::Trace(a) => engine::trace(a, p),
        Command::Dims(a) => engine::dims(a, p),
        Command::Fetch(a) => fetch::run(a, p),
    }
}

pub fn name(command: &Command) -> &'static str {
    match command {
        Command::Identities(_) => "identities",
        Command::Kernel(_) => "kernel",
        Command::Single(_) => "single",
        Command::Family(_) => "family",
        Command::Mc(_) => "mc",
        Command::Trace(_) => "trace",
        Command::Dims(_) => "dims",
        Command::Fetch(_) => "fetch",
    }
}

pub const DEFAULT_SEED: u64 = 42;

fn test_function(p: &mut Params, key: &str, flag: Option<&String>) -> Result<SpectralTestFunction> {
    let name: String = p.get(key, flag.cloned(), "fejer".to_string())?;
    Ok(SpectralTestFunction::by_name(&name)?)
}

fn stat_config(p: &mut Params, s: &StatArgs, default_l: usize) -> Result<PairCorrConfig> {
    let psi = p.get("psi", s.psi, 0.25)?;
    let l = p.get("L", s.l, default_l)?;
    let rho = test_function(p, "rho", s.rho.as_ref())?;
    let g = test_function(p, "g", s.g.as_ref())?;
    let s = p.get("s", s.s, 1.0)?;
    Ok(PairCorrConfig::new(psi, l, rho, g, s)?)
}

/// `|a − b| / max(1, |a|, |b|)`.
fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / 1f64.max(a.abs()).max(b.abs())
}

fn value<T: Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("report types serialize")
}

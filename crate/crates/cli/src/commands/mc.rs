use serde_json::json;

use stpair_core::montecarlo::{poisson_expectation_experiment, variance_trend_experiment, Model, SampleConfig};

use super::{stat_config, value, DEFAULT_SEED};
use crate::args::McArgs;
use crate::config::{IntList, Params};
use crate::error::{CliError, Result};
use crate::report::{Check, Outcome, Table};

const Z_LIMIT: f64 = 3.0;
/// Largest synthetic sample size.
const SIZE_CAP: usize = 10_000_000;

pub fn run(a: &McArgs, seed: Option<u64>, p: &mut Params) -> Result<Outcome> {
    let experiment: String = p.get("experiment", a.experiment.clone(), "poisson".to_string())?;
    let c = stat_config(p, &a.stat, 50)?;
    let seed = p.get("seed", seed, DEFAULT_SEED)?;
    match experiment.as_str() {
        "poisson" => {
            let trials = p.get("trials", a.trials, 100)?;
            let n = p.get("n", a.n, 10_000)?;
            p.finish()?;
            if n > SIZE_CAP {
                return Err(CliError::usage(format!("--n {n} exceeds {SIZE_CAP}"), "lower --n"));
            }
            let s = poisson_expectation_experiment(&c, &SampleConfig::new(n, seed, Model::SatoTate)?, trials)?;
            let z = s.z_score();
            let mut table = Table::new(&["trials", "n", "mean", "stderr", "target", "main_term", "z"]);
            table.push(vec![
                json!(s.trials),
                json!(n),
                json!(s.mean),
                json!(s.stderr),
                json!(s.target),
                json!(s.main_term),
                json!(z),
            ]);
            let mut result = value(&s);
            result["z_score"] = json!(z);
            result["n"] = json!(n);
            Ok(Outcome {
                result,
                checks: vec![Check::below(
                    "poisson-z-score",
                    z,
                    Z_LIMIT,
                    "|mean - limit| in standard errors",
                )],
                table,
                seed: Some(seed),
            })
        }
        "variance" => {
            let sizes: IntList = p.get("sizes", a.sizes.clone(), "100,10000".parse().expect("valid default"))?;
            let forms = p.get("forms", a.forms, 200)?;
            let runs = p.get("runs", a.runs, 1)?;
            p.finish()?;
            let sizes: Vec<usize> = sizes.values().iter().map(|&v| v as usize).collect();
            if sizes.len() < 2 || sizes.iter().any(|&s| s > SIZE_CAP) || runs == 0 {
                return Err(CliError::usage(
                    "the variance experiment needs at least two sizes, each at most 10^7, and runs >= 1",
                    "e.g. --sizes 100,10000 --runs 10",
                ));
            }
            let mut table = Table::new(&["seed", "size", "forms", "mean", "variance"]);
            let mut out = Vec::new();
            let mut decreasing = 0u64;
            for r in 0..runs {
                let run_seed = seed.wrapping_add(r);
                let points = variance_trend_experiment(&c, &sizes, forms, run_seed)?;
                for v in &points {
                    table.push(vec![
                        json!(run_seed),
                        json!(v.size),
                        json!(v.forms),
                        json!(v.mean),
                        json!(v.variance),
                    ]);
                }
                let first = points.first().expect("two sizes").variance;
                let last = points.last().expect("two sizes").variance;
                decreasing += u64::from(last < first);
                out.push(json!({"seed": run_seed, "points": value(&points), "decreasing": last < first}));
            }
            Ok(Outcome {
                result: json!({"runs": out, "decreasing_runs": decreasing}),
                checks: vec![Check::holds(
                    "variance-decreasing",
                    decreasing == runs,
                    format!("{decreasing} of {runs} runs have variance at the largest size below the smallest"),
                )],
                table,
                seed: Some(seed),
            })
        }
        other => Err(CliError::usage(
            format!("unknown experiment {other:?}"),
            "use --experiment poisson or --experiment variance",
        )),
    }
}

use serde_json::json;

use stpair_core::kernels::{poisson_limit, t_g_rho};
use stpair_core::CoefficientTable;

use super::test_function;
use crate::args::KernelArgs;
use crate::config::Params;
use crate::error::{CliError, Result};
use crate::report::{Check, Outcome, Table};

const DEFAULT_SCHEDULE: &str = "50:1000,100:10000,200:100000,400:1000000";
/// Largest `M` accepted; the `ĝ(n/M)` table is dense in `M`.
const M_CAP: usize = 100_000_000;
const FINAL_REL_TOLERANCE: f64 = 0.05;

fn parse_schedule(s: &str) -> Result<Vec<(usize, usize)>> {
    let bad = || {
        CliError::usage(
            format!("--schedule {s:?}: expected comma-separated L:M pairs"),
            format!("e.g. --schedule {DEFAULT_SCHEDULE}"),
        )
    };
    let pairs = s
        .split(',')
        .map(|part| {
            let (l, m) = part.trim().split_once(':').ok_or_else(bad)?;
            let l: usize = l.parse().map_err(|_| bad())?;
            let m: usize = m.parse().map_err(|_| bad())?;
            if l == 0 || m == 0 || m > M_CAP {
                return Err(CliError::usage(
                    format!("--schedule entry {part:?} out of range"),
                    format!("use L >= 1 and 1 <= M <= {M_CAP}"),
                ));
            }
            Ok((l, m))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(pairs)
}

pub fn run(a: &KernelArgs, p: &mut Params) -> Result<Outcome> {
    let psi = p.get("psi", a.psi, 0.25)?;
    let rho = test_function(p, "rho", a.rho.as_ref())?;
    let g = test_function(p, "g", a.g.as_ref())?;
    let schedule: String = p.get("schedule", a.schedule.clone(), DEFAULT_SCHEDULE.to_string())?;
    p.finish()?;
    let schedule = parse_schedule(&schedule)?;
    let target = poisson_limit(psi, &g, &rho)?;

    let mut table = Table::new(&["L", "M", "main_term", "poisson", "abs_error", "rel_error"]);
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    for &(l, m) in &schedule {
        let t = t_g_rho(&CoefficientTable::new(&rho, &g, l, psi, m)?) / (4.0 * l as f64);
        let err = (t - target).abs();
        let rel = if target != 0.0 { err / target.abs() } else { err };
        table.push(vec![
            json!(l),
            json!(m),
            json!(t),
            json!(target),
            json!(err),
            json!(rel),
        ]);
        rows.push(json!({"L": l, "M": m, "main_term": t, "abs_error": err, "rel_error": rel}));
        errors.push((err, rel));
    }
    let decreasing = errors.windows(2).all(|w| w[1].0 < w[0].0);
    let final_rel = errors.last().map_or(f64::NAN, |e| e.1);
    let checks = vec![
        Check::holds(
            "error-decreasing",
            decreasing,
            "|T/4L - limit| strictly decreasing along the schedule",
        ),
        Check::below(
            "final-relative-error",
            final_rel,
            FINAL_REL_TOLERANCE,
            "last schedule entry",
        ),
    ];
    Ok(Outcome {
        result: json!({"poisson": target, "rows": rows}),
        checks,
        table,
        seed: None,
    })
}

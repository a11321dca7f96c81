use std::str::FromStr;

use num_bigint::BigInt;
use rayon::prelude::*;
use serde_json::{json, Number, Value};

use stpair_trace::formula::trace_value;
use stpair_trace::{newspace_summary, normalize, NewspaceSummary};

use super::value;
use crate::args::{DimsArgs, TraceArgs};
use crate::config::{IntList, Params};
use crate::error::{CliError, Result};
use crate::report::{Check, Outcome, Table};

/// Largest index for `trace`; the class-number sums grow like `n`.
const INDEX_CAP: u64 = 100_000_000;
const LEVEL_CAP: u64 = 100_000;
const WEIGHT_CAP: u64 = 10_000;

/// Exact integer as a JSON number.
fn big(v: &BigInt) -> Value {
    Value::Number(Number::from_str(&v.to_string()).expect("integer literal"))
}

pub fn trace(a: &TraceArgs, p: &mut Params) -> Result<Outcome> {
    let level = p.get("level", a.level, 1)?;
    let weight = p.get("weight", a.weight, 12)?;
    let ns: IntList = p.get("n", a.n.clone(), "2".parse().expect("valid default"))?;
    p.finish()?;
    if let Some(&n) = ns.values().iter().find(|&&n| n > INDEX_CAP) {
        return Err(CliError::usage(
            format!("--n {n} exceeds {INDEX_CAP}"),
            "use smaller indices",
        ));
    }
    let mut table = Table::new(&["n", "full_trace", "new_trace", "normalized_full", "normalized_new"]);
    let mut rows = Vec::new();
    for &n in ns.values() {
        let t = trace_value(level, weight, n)?;
        let (nf, nn) = (normalize(&t.full_trace, n, weight), normalize(&t.new_trace, n, weight));
        let (f, w) = (big(&t.full_trace), big(&t.new_trace));
        table.push(vec![json!(n), f.clone(), w.clone(), json!(nf), json!(nn)]);
        rows.push(json!({
            "n": n,
            "full_trace": f,
            "new_trace": w,
            "normalized_full": nf,
            "normalized_new": nn,
        }));
    }
    Ok(Outcome {
        result: json!({"level": level, "weight": weight, "traces": rows}),
        checks: Vec::new(),
        table,
        seed: None,
    })
}

pub fn dims(a: &DimsArgs, p: &mut Params) -> Result<Outcome> {
    let levels: IntList = p.get("level", a.level.clone(), "1..100".parse().expect("valid default"))?;
    let weights: IntList = p.get("weight", a.weight.clone(), "2..60:2".parse().expect("valid default"))?;
    p.finish()?;
    if levels.values().iter().any(|&n| n > LEVEL_CAP) || weights.values().iter().any(|&k| k > WEIGHT_CAP) {
        return Err(CliError::usage(
            format!("levels are capped at {LEVEL_CAP} and weights at {WEIGHT_CAP}"),
            "narrow --level / --weight",
        ));
    }
    let grid: Vec<(u64, u32)> = levels
        .values()
        .iter()
        .flat_map(|&n| weights.values().iter().map(move |&k| (n, k as u32)))
        .collect();
    let summaries: Vec<NewspaceSummary> = grid
        .par_iter()
        .map(|&(n, k)| newspace_summary(n, k))
        .collect::<std::result::Result<_, _>>()?;
    let mut table = Table::new(&["level", "weight", "dim", "main_term", "deviation", "bound", "holds"]);
    let mut violations = Vec::new();
    for s in &summaries {
        let holds = s.bound_holds();
        if !holds {
            violations.push(json!([s.level, s.weight]));
        }
        table.push(vec![
            json!(s.level),
            json!(s.weight),
            json!(s.dim),
            json!(s.main_term.to_string()),
            json!(s.deviation.to_string()),
            json!(s.bound),
            json!(holds),
        ]);
    }
    let checks = vec![Check::holds(
        "dimension-bound",
        violations.is_empty(),
        format!("{} of {} spaces violate the bound", violations.len(), summaries.len()),
    )];
    Ok(Outcome {
        result: json!({"spaces": value(&summaries), "violations": violations}),
        checks,
        table,
        seed: None,
    })
}

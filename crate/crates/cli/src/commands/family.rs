use serde_json::{json, Value};

use stpair_trace::family::ErrorScale;
use stpair_trace::{
    check_trace_estimate, family_avg, family_moments, newspace_summary, EigenCaps, Error as TraceError,
};

use super::{stat_config, value};
use crate::args::FamilyArgs;
use crate::config::{IntList, Params};
use crate::error::{CliError, Result};
use crate::report::{Check, Outcome, Table};

const MOMENT_TOLERANCE: f64 = 1e-9;

fn error_scale(s: &str) -> Result<ErrorScale> {
    match s {
        "sqrt-level" => Ok(ErrorScale::SqrtLevel),
        "four-nu" => Ok(ErrorScale::FourNu),
        other => Err(CliError::usage(
            format!("unknown error scale {other:?}"),
            "use --error-scale sqrt-level or --error-scale four-nu",
        )),
    }
}

pub fn run(a: &FamilyArgs, p: &mut Params) -> Result<Outcome> {
    let level = p.get("level", a.level, 1)?;
    let weight = p.get("weight", a.weight, 24)?;
    let ns: IntList = p.get("n", a.n.clone(), "4,9,25".parse().expect("valid default"))?;
    let scale: String = p.get("error-scale", a.error_scale.clone(), "sqrt-level".to_string())?;
    let x = p.get("x", a.x, 19)?;
    let c = stat_config(p, &a.stat, 3)?;
    let caps = EigenCaps {
        d_max: p.get("d-cap", a.d_cap, EigenCaps::default().d_max)?,
        p_max: p.get("p-cap", a.p_cap, EigenCaps::default().p_max)?,
    };
    p.finish()?;
    let scale = error_scale(&scale)?;

    let summary = newspace_summary(level, weight)?;
    let mut checks = vec![Check::holds(
        "dimension-bound",
        summary.bound_holds(),
        format!(
            "|dim - N B1 (k-1)/12| <= sqrt(N)/2 + (7/12) 2^nu + 1 with dim {}",
            summary.dim
        ),
    )];
    if summary.dim == 0 {
        return Err(TraceError::EmptyFamily { level, weight }.into());
    }

    let mut table = Table::new(&[
        "n",
        "average",
        "reference",
        "deviation",
        "trace_sum",
        "normalized_residual",
    ]);
    let mut averages = Vec::new();
    for &n in ns.values() {
        let avg = family_avg(level, weight, n)?;
        let est = check_trace_estimate(level, weight, n, scale)?;
        // ⟨a_f(m²)⟩ → 1/m; non-squares average to 0.
        let reference = est.main_term / est.family_size as f64;
        let deviation = (avg - reference).abs();
        table.push(vec![
            json!(n),
            json!(avg),
            json!(reference),
            json!(deviation),
            json!(est.sum),
            json!(est.normalized_residual),
        ]);
        averages.push(json!({
            "n": n,
            "average": avg,
            "reference": reference,
            "deviation": deviation,
            "estimate": value(&est),
        }));
    }

    let moments = match family_moments(level, weight, &c, x, &caps) {
        Ok(m) => {
            checks.push(Check::below(
                "variance-nonnegative",
                -m.variance,
                MOMENT_TOLERANCE,
                "exact family variance >= -1e-9",
            ));
            checks.push(Check::below(
                "klm-sum",
                m.max_klm_residual,
                MOMENT_TOLERANCE,
                "largest per-form relative |K + L + M - r2^2|",
            ));
            value(&m)
        }
        Err(e @ TraceError::CapExceeded { .. }) => {
            log::warn!("exact moments skipped: {e}");
            json!({"skipped": e.to_string()})
        }
        Err(e) => return Err(e.into()),
    };

    Ok(Outcome {
        result: json!({
            "summary": value(&summary),
            "averages": Value::Array(averages),
            "moments": moments,
        }),
        checks,
        table,
        seed: None,
    })
}

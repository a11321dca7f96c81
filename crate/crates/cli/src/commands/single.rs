use serde_json::json;

use stpair_core::paircorr::{pair_corr_report, CountingVariant, Klm};
use stpair_core::AngleSet;
use stpair_data::{angles_from_series, delta_series, CacheDir, LmfdbClient, RemoteFormRef};

use super::{rel, stat_config, value};
use crate::args::SingleArgs;
use crate::config::Params;
use crate::error::{CliError, Result};
use crate::report::{Check, Outcome, Table};

pub const IDENTITY_TOLERANCE: f64 = 1e-9;
/// Longest coefficient series accepted (Δ is expanded densely up to x).
const X_CAP: u64 = 10_000_000;

fn load_angles(form: &str, x: u64) -> Result<AngleSet> {
    if x > X_CAP {
        return Err(CliError::usage(
            format!("--x {x} exceeds {X_CAP}"),
            format!("use --x {X_CAP} or less"),
        ));
    }
    if form == "delta" {
        return Ok(angles_from_series(&delta_series(x.max(1)), x)?);
    }
    let Some(spec) = form.strip_prefix("lmfdb:") else {
        return Err(CliError::usage(
            format!("unknown form {form:?}"),
            "use --form delta or --form lmfdb:N.k.i (e.g. lmfdb:11.2.1)",
        ));
    };
    let r = RemoteFormRef::parse(spec, x.max(1) as usize)?;
    let fetched = LmfdbClient::from_env(CacheDir::from_env()).fetch(&r)?;
    Ok(angles_from_series(&fetched.series, x)?)
}

fn counting_variant(s: &str) -> Result<CountingVariant> {
    match s {
        "angle" => Ok(CountingVariant::Angle),
        "straightened" => Ok(CountingVariant::Straightened),
        other => Err(CliError::usage(
            format!("unknown counting variant {other:?}"),
            "use --counting angle or --counting straightened",
        )),
    }
}

/// Largest relative mismatch between each split total and its re-summed parts.
fn split_residual(k: &Klm) -> f64 {
    [k.k, k.l, k.m]
        .iter()
        .map(|s| rel(s.total, s.resummed()))
        .fold(0.0, f64::max)
}

pub fn run(a: &SingleArgs, p: &mut Params) -> Result<Outcome> {
    let form: String = p.get("form", a.form.clone(), "delta".to_string())?;
    let x = p.get("x", a.x, 1000)?;
    let c = stat_config(p, &a.stat, 10)?;
    let n_cap = p.get_opt("n-cap", a.n_cap)?;
    let counting: String = p.get("counting", a.counting.clone(), "angle".to_string())?;
    p.finish()?;
    let c = c.with_n_cap(n_cap).with_counting(counting_variant(&counting)?);
    let angles = load_angles(&form, x)?;
    if angles.is_empty() {
        return Err(CliError::usage(
            format!("no primes up to {x} coprime to the level"),
            "raise --x",
        ));
    }
    let report = pair_corr_report(&angles, &c);

    let mut checks = Vec::new();
    if let Some(klm) = &report.klm {
        checks.push(Check::below(
            "klm-sum",
            rel(klm.sum(), report.r2_squared),
            IDENTITY_TOLERANCE,
            "relative |K + L + M - r2^2|",
        ));
        checks.push(Check::below(
            "klm-splits",
            split_residual(klm),
            IDENTITY_TOLERANCE,
            "relative mismatch of the one/two/four splits",
        ));
    }
    if let Some(smooth) = report.r2_smooth {
        checks.push(Check::below(
            "r2-routes",
            rel(report.r2, smooth),
            IDENTITY_TOLERANCE,
            "series route against the direct kernel double sum",
        ));
    }
    checks.push(Check::below(
        "n-rho-routes",
        rel(report.n_rho.direct, report.n_rho.series),
        IDENTITY_TOLERANCE,
        "kernel sums against the Hecke series",
    ));

    let mut result = value(&report);
    let obj = result.as_object_mut().expect("report is an object");
    obj.insert("form".into(), json!(form));
    if let Some(klm) = &report.klm {
        obj.insert("k_part".into(), json!(klm.k.total));
        obj.insert("l_part".into(), json!(klm.l.total));
        obj.insert("m_part".into(), json!(klm.m.total));
    }
    let table = Table::flattened(&result);
    Ok(Outcome {
        result,
        checks,
        table,
        seed: None,
    })
}

use serde_json::{json, Map, Value};

use stpair_core::arith::prime_window;
use stpair_data::{CacheDir, LmfdbClient, RemoteFormRef};
use stpair_trace::{newspace_summary, trace_tn_new};

use crate::args::FetchArgs;
use crate::config::Params;
use crate::error::{CliError, Result};
use crate::report::{Check, Outcome, Table};

/// Primes checked against the trace engine when the newspace is one-dimensional.
const TRACE_CHECK_PRIMES: u64 = 50;
const HURWITZ_CAP: u64 = 400_000_000;
const COUNT_CAP: usize = 1_000_000;

pub fn run(a: &FetchArgs, p: &mut Params) -> Result<Outcome> {
    let form = p.get_opt("form", a.form.clone())?;
    let count = p.get("count", a.count, 100)?;
    let hurwitz = p.get_opt("hurwitz", a.hurwitz)?;
    p.finish()?;
    if form.is_none() && hurwitz.is_none() {
        return Err(CliError::usage(
            "nothing to fetch",
            "pass --form N.k.i (e.g. 11.2.1) and/or --hurwitz N",
        ));
    }
    if count > COUNT_CAP {
        return Err(CliError::usage(
            format!("--count {count} exceeds {COUNT_CAP}"),
            "lower --count",
        ));
    }
    let cache = CacheDir::from_env();
    let mut result = Map::new();
    let mut checks = Vec::new();
    let mut table = Table::new(&["n", "a_n"]);

    if let Some(max_n) = hurwitz {
        if max_n > HURWITZ_CAP {
            return Err(CliError::usage(
                format!("--hurwitz {max_n} exceeds {HURWITZ_CAP}"),
                "lower --hurwitz",
            ));
        }
        let covered = cache.warm_hurwitz(max_n)?;
        result.insert(
            "hurwitz".into(),
            json!({"path": cache.hurwitz_path().display().to_string(), "max_n": covered}),
        );
    }

    if let Some(form) = form {
        let r = RemoteFormRef::parse(form.strip_prefix("lmfdb:").unwrap_or(&form), count)?;
        let client = LmfdbClient::from_env(cache.clone());
        let fetched = client.fetch(&r)?;
        log::info!(
            "{} {}",
            r.label(),
            if fetched.from_cache {
                "read from cache"
            } else {
                "fetched"
            }
        );
        let s = &fetched.series;
        checks.push(Check::holds(
            "multiplicativity",
            s.multiplicativity_violation(s.n_max()).is_none(),
            "a(mn) = a(m)a(n) for coprime m, n in range",
        ));
        checks.push(Check::holds(
            "hecke-recursion",
            s.hecke_recursion_violation(s.n_max(), 64).is_none(),
            "a(p^(j+1)) = a(p)a(p^j) - p^(k-1)a(p^(j-1)) for p not dividing N",
        ));
        let dim = newspace_summary(r.level, r.weight)?.dim;
        if dim == 1 {
            let window = prime_window(TRACE_CHECK_PRIMES.min(s.n_max()), r.level);
            let mut mismatch = None;
            for &q in window.primes() {
                if s.a(q) != Some(&trace_tn_new(r.level, r.weight, q)?) {
                    mismatch = Some(q);
                    break;
                }
            }
            checks.push(Check::holds(
                "trace-agreement",
                mismatch.is_none(),
                match mismatch {
                    Some(q) => format!("a({q}) differs from the newspace trace"),
                    None => format!("a(p) equals the newspace trace for {} primes", window.count()),
                },
            ));
        }
        let coeffs: Vec<Value> = s
            .coeffs()
            .iter()
            .map(|c| Value::Number(c.to_string().parse().expect("integer literal")))
            .collect();
        for (i, c) in coeffs.iter().enumerate() {
            table.push(vec![json!(i + 1), c.clone()]);
        }
        result.insert(
            "form".into(),
            json!({
                "label": r.label(),
                "level": r.level,
                "weight": r.weight,
                "count": r.count,
                "newspace_dim": dim,
                "cache_path": fetched.cache_path.display().to_string(),
                "coefficients": coeffs,
            }),
        );
    }
    Ok(Outcome {
        result: result.into(),
        checks,
        table,
        seed: None,
    })
}

//! Client for the LMFDB JSON API (`mf_newforms` collection), restricted to
//! rational newforms with trivial character, where the stored coefficient traces
//! are the Hecke eigenvalues themselves.

use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Duration;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use stpair_core::arith::{prime_window, DELIGNE_SLACK};

use crate::cache::{CacheDir, CacheStatus};
use crate::error::{Error, Result};
use crate::series::CoefficientSeries;

/// Environment variable overriding the API base URL.
pub const API_URL_ENV: &str = "STPAIR_LMFDB_URL";
pub const DEFAULT_API_URL: &str = "https://www.lmfdb.org/api";

/// A newform `N.k.a.<letters>`: level, weight, 1-based Galois-orbit index, and
/// the number of coefficients wanted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemoteFormRef {
    pub level: u64,
    pub weight: u32,
    pub index: u32,
    pub count: usize,
}

impl RemoteFormRef {
    /// Orbit letters: 1 → a, 26 → z, 27 → ba (LMFDB base-26 labels).
    pub fn orbit_letters(index: u32) -> String {
        let mut n = index - 1;
        let mut out = Vec::new();
        loop {
            out.push(b'a' + (n % 26) as u8);
            n /= 26;
            if n == 0 {
                break;
            }
        }
        out.reverse();
        String::from_utf8(out).expect("ascii")
    }

    pub fn label(&self) -> String {
        format!("{}.{}.a.{}", self.level, self.weight, Self::orbit_letters(self.index))
    }

    pub fn cache_key(&self) -> String {
        format!("{}-{}", self.label(), self.count)
    }

    /// Parses `N.k.i` (numeric index) or an LMFDB label `N.k.a.x`.
    pub fn parse(spec: &str, count: usize) -> Result<Self> {
        let bad = || Error::InvalidParameter {
            name: "form",
            reason: format!("{spec:?}: expected N.k.i or N.k.a.<letters>"),
        };
        let parts: Vec<&str> = spec.split('.').collect();
        let (level, weight) = match parts.as_slice() {
            [n, k, ..] => (n.parse().map_err(|_| bad())?, k.parse().map_err(|_| bad())?),
            _ => return Err(bad()),
        };
        let index = match parts.as_slice() {
            [_, _, i] => i.parse().map_err(|_| bad())?,
            [_, _, "a", letters] if !letters.is_empty() && letters.bytes().all(|b| b.is_ascii_lowercase()) => {
                letters.bytes().fold(0u32, |acc, b| acc * 26 + (b - b'a') as u32) + 1
            }
            _ => return Err(bad()),
        };
        if index == 0 || count == 0 {
            return Err(bad());
        }
        Ok(RemoteFormRef {
            level,
            weight,
            index,
            count,
        })
    }
}

/// Result of a fetch, with provenance.
#[derive(Debug, Clone)]
pub struct Fetched {
    pub series: CoefficientSeries,
    pub from_cache: bool,
    pub cache_path: PathBuf,
}

pub struct LmfdbClient {
    base_url: String,
    cache: CacheDir,
    agent: ureq::Agent,
    network_calls: AtomicUsize,
}

impl LmfdbClient {
    pub fn new(base_url: impl Into<String>, cache: CacheDir) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(60)))
            .build()
            .into();
        LmfdbClient {
            base_url: base_url.into().trim_end_matches('/').to_string(),
            cache,
            agent,
            network_calls: AtomicUsize::new(0),
        }
    }

    /// Base URL from `$STPAIR_LMFDB_URL` (default [`DEFAULT_API_URL`]).
    pub fn from_env(cache: CacheDir) -> Self {
        Self::new(
            std::env::var(API_URL_ENV).unwrap_or_else(|_| DEFAULT_API_URL.to_string()),
            cache,
        )
    }

    pub fn network_calls(&self) -> usize {
        self.network_calls.load(Ordering::Relaxed)
    }

    pub fn url(&self, r: &RemoteFormRef) -> String {
        format!(
            "{}/mf_newforms/?label={}&_format=json&_fields=label,level,weight,dim,char_orbit_index,traces",
            self.base_url,
            r.label()
        )
    }

    /// Cached payload if valid, otherwise one request; the raw body is cached
    /// before parsing so later schema changes cannot corrupt stored data.
    pub fn fetch(&self, r: &RemoteFormRef) -> Result<Fetched> {
        let key = r.cache_key();
        let cache_path = self.cache.entry_path("lmfdb", &key)?;
        if let CacheStatus::Hit(payload) = self.cache.load("lmfdb", &key)? {
            return Ok(Fetched {
                series: parse_newform(&payload, r)?,
                from_cache: true,
                cache_path,
            });
        }
        let url = self.url(r);
        self.network_calls.fetch_add(1, Ordering::Relaxed);
        let body = self
            .agent
            .get(&url)
            .call()
            .and_then(|mut resp| resp.body_mut().read_to_string())
            .map_err(|e| Error::Fetch {
                url: url.clone(),
                reason: e.to_string(),
            })?;
        let series = parse_newform(&body, r)?;
        self.cache.store("lmfdb", &key, &body)?;
        Ok(Fetched {
            series,
            from_cache: false,
            cache_path,
        })
    }
}

fn schema(field: &str, reason: impl Into<String>) -> Error {
    Error::Schema {
        field: field.to_string(),
        reason: reason.into(),
    }
}

fn integer(v: &Value, field: &str) -> Result<BigInt> {
    match v {
        Value::Number(n) => n
            .to_string()
            .parse()
            .map_err(|_| schema(field, format!("{n} is not an integer"))),
        Value::String(s) => s.parse().map_err(|_| schema(field, format!("{s:?} is not an integer"))),
        other => Err(schema(field, format!("expected an integer, got {other}"))),
    }
}

/// Parses an `mf_newforms` response and validates `a(1) = 1` and the Deligne bound.
pub fn parse_newform(body: &str, r: &RemoteFormRef) -> Result<CoefficientSeries> {
    let v: Value = serde_json::from_str(body).map_err(|e| schema("<root>", e.to_string()))?;
    let rec = v
        .get("data")
        .and_then(Value::as_array)
        .ok_or_else(|| schema("data", "missing or not an array"))?
        .first()
        .ok_or_else(|| schema("data", format!("no newform labelled {}", r.label())))?;
    let label = rec
        .get("label")
        .and_then(Value::as_str)
        .ok_or_else(|| schema("label", "missing"))?;
    if label != r.label() {
        return Err(schema("label", format!("{label} returned for {}", r.label())));
    }
    for (field, want) in [("level", r.level), ("weight", r.weight as u64)] {
        let got = rec
            .get(field)
            .and_then(Value::as_u64)
            .ok_or_else(|| schema(field, "missing"))?;
        if got != want {
            return Err(schema(field, format!("{got}, expected {want}")));
        }
    }
    let dim = rec
        .get("dim")
        .and_then(Value::as_u64)
        .ok_or_else(|| schema("dim", "missing"))?;
    if dim != 1 {
        return Err(Error::Validation {
            label: label.to_string(),
            reason: format!("coefficient field has degree {dim}; only rational newforms are supported"),
        });
    }
    let traces = rec
        .get("traces")
        .and_then(Value::as_array)
        .ok_or_else(|| schema("traces", "missing or not an array"))?;
    let mut coeffs: Vec<BigInt> = traces.iter().map(|t| integer(t, "traces")).collect::<Result<_>>()?;
    // Some collections store a(0) = 0 in front.
    if coeffs.len() >= 2 && coeffs[0] == BigInt::from(0) && coeffs[1] == BigInt::from(1) {
        coeffs.remove(0);
    }
    if coeffs.len() < r.count {
        return Err(schema(
            "traces",
            format!("{} coefficients, {} requested", coeffs.len(), r.count),
        ));
    }
    coeffs.truncate(r.count);
    let series = CoefficientSeries::new(label, r.level, r.weight, coeffs)?;
    for &p in prime_window(r.count as u64, r.level).primes() {
        let v = series.normalized(p).expect("p ≤ count");
        if v.abs() > 2.0 + DELIGNE_SLACK {
            return Err(Error::Validation {
                label: label.to_string(),
                reason: format!("a({p}) normalizes to {v}, outside [-2, 2]"),
            });
        }
    }
    Ok(series)
}

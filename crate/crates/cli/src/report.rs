//! Versioned report envelope with canonical JSON and CSV encodings.
//!
//! JSON output is pretty-printed with object keys in sorted order, so equal
//! reports give equal bytes and parse → re-emit is the identity. CSV output is
//! a block of `# key=value` header lines (schema, version, subcommand, seed,
//! config echo, check verdicts) followed by the subcommand's table with a
//! column header row.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, Result};

pub const SCHEMA: &str = "stpair-report/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        <Self as clap::ValueEnum>::from_str(s, true)
    }
}

/// One asserted invariant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Measured quantity, absent when it is not a finite number.
    pub value: Option<f64>,
    /// Passing requires `value < limit`.
    pub limit: Option<f64>,
    pub detail: String,
}

impl Check {
    pub fn below(name: &str, value: f64, limit: f64, detail: impl Into<String>) -> Self {
        Check {
            name: name.to_string(),
            passed: value < limit,
            value: value.is_finite().then_some(value),
            limit: Some(limit),
            detail: detail.into(),
        }
    }

    pub fn holds(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.to_string(),
            passed,
            value: None,
            limit: None,
            detail: detail.into(),
        }
    }
}

/// Plot-ready rows for CSV output.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Two-column `key,value` table of every scalar leaf, keyed by dotted path.
    pub fn flattened(v: &Value) -> Self {
        fn walk(prefix: &str, v: &Value, t: &mut Table) {
            let join = |k: &str| {
                if prefix.is_empty() {
                    k.to_string()
                } else {
                    format!("{prefix}.{k}")
                }
            };
            match v {
                Value::Object(m) => m.iter().for_each(|(k, x)| walk(&join(k), x, t)),
                Value::Array(a) => a
                    .iter()
                    .enumerate()
                    .for_each(|(i, x)| walk(&join(&i.to_string()), x, t)),
                leaf => t.push(vec![Value::String(prefix.to_string()), leaf.clone()]),
            }
        }
        let mut t = Table::new(&["key", "value"]);
        walk("", v, &mut t);
        t
    }
}

/// What a subcommand hands back for the envelope.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub result: Value,
    pub checks: Vec<Check>,
    pub table: Table,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub tool_version: String,
    pub subcommand: String,
    pub seed: Option<u64>,
    pub config: BTreeMap<String, Value>,
    pub checks: Vec<Check>,
    pub result: Value,
    /// Wall-clock seconds; only recorded on request since it breaks reproducibility.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_seconds: Option<f64>,
    #[serde(skip)]
    pub table: Table,
}

impl Report {
    pub fn new(subcommand: &str) -> Self {
        Report {
            schema: SCHEMA.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            subcommand: subcommand.to_string(),
            seed: None,
            config: BTreeMap::new(),
            checks: Vec::new(),
            result: Value::Null,
            wall_seconds: None,
            table: Table::default(),
        }
    }

    pub fn from_outcome(subcommand: &str, config: BTreeMap<String, Value>, o: Outcome) -> Self {
        Report {
            seed: o.seed,
            config,
            checks: o.checks,
            result: o.result,
            table: o.table,
            ..Self::new(subcommand)
        }
    }

    pub fn failed_checks(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

pub fn emit(report: &Report, format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Json => {
            let v = serde_json::to_value(report).map_err(internal)?;
            emit_json_value(&v)
        }
        Format::Csv => emit_csv(report),
    }
}

/// Canonical text of a parsed JSON document.
pub fn emit_json_value(v: &Value) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(v).map_err(internal)?;
    out.push(b'\n');
    Ok(out)
}

fn internal(e: impl std::fmt::Display) -> CliError {
    CliError::runtime(
        format!("report encoding failed: {e}"),
        "report it with the full command line",
    )
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn emit_csv(report: &Report) -> Result<Vec<u8>> {
    let mut head = String::new();
    let mut line = |k: &str, v: &str| head.push_str(&format!("# {k}={v}\n"));
    line("schema", &report.schema);
    line("tool_version", &report.tool_version);
    line("subcommand", &report.subcommand);
    line("seed", &report.seed.map(|s| s.to_string()).unwrap_or_default());
    for (k, v) in &report.config {
        line(&format!("config.{k}"), &cell(v));
    }
    for c in &report.checks {
        let verdict = if c.passed { "pass" } else { "fail" };
        line(&format!("check.{}", c.name), &format!("{verdict} {}", c.detail));
    }
    if let Some(w) = report.wall_seconds {
        line("wall_seconds", &w.to_string());
    }
    let mut out = head.into_bytes();
    if !report.table.columns.is_empty() {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&report.table.columns).map_err(internal)?;
        for row in &report.table.rows {
            w.write_record(row.iter().map(cell)).map_err(internal)?;
        }
        out.extend(w.into_inner().map_err(internal)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn sample() -> Report {
        let mut config = BTreeMap::new();
        config.insert("psi".into(), json!(0.25));
        config.insert("L".into(), json!(10));
        let mut table = Table::new(&["n", "value"]);
        table.push(vec![json!(1), json!(0.1)]);
        table.push(vec![json!(2), json!("a,b")]);
        Report::from_outcome(
            "kernel",
            config,
            Outcome {
                result: json!({"zeta": [1.5, -2], "alpha": {"b": null, "a": 1e-300}}),
                checks: vec![
                    Check::below("err", 0.5, 1.0, "ok"),
                    Check::below("nan", f64::NAN, 1.0, ""),
                ],
                table,
                seed: Some(7),
            },
        )
    }

    #[test]
    fn empty_report_has_envelope() {
        let r = Report::new("identities");
        let v: Value = serde_json::from_slice(&emit(&r, Format::Json).unwrap()).unwrap();
        assert_eq!(v["schema"], SCHEMA);
        assert_eq!(v["result"], Value::Null);
        assert_eq!(v["checks"], json!([]));
        let csv = String::from_utf8(emit(&r, Format::Csv).unwrap()).unwrap();
        assert!(csv.starts_with("# schema=stpair-report/1\n"));
        assert!(csv.lines().all(|l| l.starts_with("# ")));
    }

    #[test]
    fn json_is_canonical_and_round_trips() {
        let r = sample();
        let a = emit(&r, Format::Json).unwrap();
        assert_eq!(a, emit(&r.clone(), Format::Json).unwrap());
        let text = String::from_utf8(a.clone()).unwrap();
        assert!(text.find("\"alpha\"").unwrap() < text.find("\"zeta\"").unwrap());
        let v: Value = serde_json::from_slice(&a).unwrap();
        assert_eq!(emit_json_value(&v).unwrap(), a);
        let back: Report = serde_json::from_slice(&a).unwrap();
        assert_eq!(emit(&back, Format::Json).unwrap(), a);
        assert!(!back.checks[1].passed && back.checks[1].value.is_none());
    }

    #[test]
    fn csv_layout() {
        let text = String::from_utf8(emit(&sample(), Format::Csv).unwrap()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines.contains(&"# config.psi=0.25"));
        assert!(lines.contains(&"# check.err=pass ok"));
        assert_eq!(&lines[lines.len() - 3..], &["n,value", "1,0.1", "2,\"a,b\""]);
    }

    #[test]
    fn flattening() {
        let t = Table::flattened(&json!({"a": {"b": 1, "c": [true, null]}, "d": "x"}));
        let keys: Vec<String> = t.rows.iter().map(|r| cell(&r[0])).collect();
        assert_eq!(keys, ["a.b", "a.c.0", "a.c.1", "d"]);
    }
}

//! Run configuration merged from command-line flags, a config file and defaults.
//!
//! A config file holds one `key = value` pair per line, where the key is a long
//! flag name without its dashes (`psi`, `L`, `n-cap`, `seed`). Blank lines and
//! lines starting with `#` are ignored. Flags win over the file and the file wins
//! over built-in defaults. Every resolved value is echoed into the report.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;
use serde_json::Value;

use crate::error::{CliError, Result};

/// Keys every subcommand accepts, whether or not it uses them.
const GLOBAL_KEYS: [&str; 5] = ["threads", "format", "output", "seed", "timing"];

pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |what: &str| {
            CliError::usage(
                format!("config line {}: {what}", i + 1),
                "write one `key = value` pair per line, e.g. `psi = 0.25`",
            )
        };
        let (k, v) = line.split_once('=').ok_or_else(|| bad("expected `key = value`"))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || k.starts_with('-') {
            return Err(bad("keys are flag names without dashes"));
        }
        if out.insert(k.to_string(), v.to_string()).is_some() {
            return Err(bad(&format!("duplicate key `{k}`")));
        }
    }
    Ok(out)
}

#[derive(Debug, Default)]
pub struct Params {
    file: BTreeMap<String, String>,
    used: BTreeSet<String>,
    echo: BTreeMap<String, Value>,
}

impl Params {
    pub fn new(file: BTreeMap<String, String>) -> Self {
        Params {
            file,
            ..Default::default()
        }
    }

    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::usage(
                format!("cannot read config file {}: {e}", path.display()),
                "check the --config path",
            )
        })?;
        Ok(Self::new(parse_config(&text)?))
    }

    fn lookup<T>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.used.insert(key.to_string());
        if flag.is_some() {
            return Ok(flag);
        }
        match self.file.get(key) {
            Some(s) => s.parse().map(Some).map_err(|e| {
                CliError::usage(
                    format!("config key `{key}`: {s:?}: {e}"),
                    format!("fix `{key}` in the config file or pass --{key}"),
                )
            }),
            None => Ok(None),
        }
    }

    fn record<T: Serialize>(&mut self, key: &str, v: &T) {
        let value = serde_json::to_value(v).unwrap_or(Value::Null);
        self.echo.insert(key.to_string(), value);
    }

    pub fn get<T>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T>
    where
        T: FromStr + Serialize,
        T::Err: Display,
    {
        let v = self.lookup(key, flag)?.unwrap_or(default);
        self.record(key, &v);
        Ok(v)
    }

    pub fn get_opt<T>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>>
    where
        T: FromStr + Serialize,
        T::Err: Display,
    {
        let v = self.lookup(key, flag)?;
        self.record(key, &v);
        Ok(v)
    }

    /// Resolves without echoing, for values that do not affect the result.
    pub fn get_unechoed<T>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.lookup(key, flag)
    }

    /// Rejects config keys that no resolved parameter consumed.
    pub fn finish(&self) -> Result<()> {
        let unknown: Vec<&str> = self
            .file
            .keys()
            .map(String::as_str)
            .filter(|k| !self.used.contains(*k) && !GLOBAL_KEYS.contains(k))
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(CliError::usage(
                format!("unknown config key(s) for this subcommand: {}", unknown.join(", ")),
                "remove them or run `stpair <subcommand> --help` for the accepted keys",
            ))
        }
    }

    pub fn echo(&self) -> &BTreeMap<String, Value> {
        &self.echo
    }
}

/// Comma-separated integers and inclusive ranges `a..b` or `a..b:step`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(into = "String")]
pub struct IntList {
    text: String,
    values: Vec<u64>,
}

/// Longest list a range expression may expand to.
const LIST_CAP: usize = 1_000_000;

impl IntList {
    pub fn values(&self) -> &[u64] {
        &self.values
    }
}

impl From<IntList> for String {
    fn from(l: IntList) -> String {
        l.text
    }
}

impl FromStr for IntList {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let num = |t: &str| {
            t.trim()
                .parse::<u64>()
                .map_err(|_| format!("{t:?} is not a nonnegative integer"))
        };
        let mut values = Vec::new();
        for part in s.split(',') {
            if let Some((lo, rest)) = part.split_once("..") {
                let (hi, step) = match rest.split_once(':') {
                    Some((hi, step)) => (num(hi)?, num(step)?),
                    None => (num(rest)?, 1),
                };
                let lo = num(lo)?;
                if step == 0 || hi < lo {
                    return Err(format!("{part:?}: need lo <= hi and a positive step"));
                }
                if ((hi - lo) / step) as usize + values.len() >= LIST_CAP {
                    return Err(format!("{part:?} expands past {LIST_CAP} values"));
                }
                values.extend((lo..=hi).step_by(step as usize));
            } else {
                values.push(num(part)?);
            }
        }
        Ok(IntList {
            text: s.trim().to_string(),
            values,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_config_lines() {
        let m = parse_config("# comment\n\npsi = 0.25\nL=10\n  n-cap = 500  \n").unwrap();
        assert_eq!(m.len(), 3);
        assert_eq!(m["L"], "10");
        assert_eq!(m["n-cap"], "500");
        assert!(parse_config("psi 0.25").is_err());
        assert!(parse_config("psi = 1\npsi = 2").is_err());
        assert!(parse_config("--psi = 1").is_err());
    }

    #[test]
    fn precedence_is_flag_then_file_then_default() {
        let mut p = Params::new(parse_config("psi = 0.3\nL = 7").unwrap());
        assert_eq!(p.get("psi", Some(0.1), 0.25).unwrap(), 0.1);
        assert_eq!(p.get("L", None::<usize>, 10).unwrap(), 7);
        assert_eq!(p.get("x", None::<u64>, 1000).unwrap(), 1000);
        assert_eq!(p.get_opt::<usize>("n-cap", None).unwrap(), None);
        p.finish().unwrap();
        let echo = p.echo();
        assert_eq!(echo["psi"], serde_json::json!(0.1));
        assert_eq!(echo["L"], serde_json::json!(7));
        assert_eq!(echo["n-cap"], Value::Null);
    }

    #[test]
    fn bad_and_unknown_keys() {
        let mut p = Params::new(parse_config("L = ten\nbogus = 1\nseed = 3").unwrap());
        let err = p.get("L", None::<usize>, 10).unwrap_err();
        assert!(err.message.contains("`L`"));
        let err = p.finish().unwrap_err();
        assert!(err.message.contains("bogus") && !err.message.contains("seed"));
    }

    #[test]
    fn int_lists() {
        let l: IntList = "1..5,9,10..20:5".parse().unwrap();
        assert_eq!(l.values(), &[1, 2, 3, 4, 5, 9, 10, 15, 20]);
        assert_eq!(serde_json::to_value(&l).unwrap(), serde_json::json!("1..5,9,10..20:5"));
        assert!("5..1".parse::<IntList>().is_err());
        assert!("1..4:0".parse::<IntList>().is_err());
        assert!("x".parse::<IntList>().is_err());
        assert!("0..10000000".parse::<IntList>().is_err());
    }
}

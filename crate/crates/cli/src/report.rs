//! Canonical JSON and CSV emission.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use oll_core::{ExtReal, StepFunction, TraceRow};
use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::CliError;

pub const SIGNIFICANT_DIGITS: usize = 12;
pub const TRACE_CSV_HEADER: &str = "set,n,c_n,ratio,norm";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ToolInfo {
    pub name: &'static str,
    pub version: &'static str,
}

impl ToolInfo {
    pub fn current() -> Self {
        ToolInfo { name: "oll", version: env!("CARGO_PKG_VERSION") }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Timing {
    pub elapsed_seconds: f64,
}

/// Envelope shared by every subcommand.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report<T> {
    pub tool: ToolInfo,
    pub command: &'static str,
    pub config_digest: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub result: T,
    pub timing: Timing,
}

/// Rounds `x` to [`SIGNIFICANT_DIGITS`] significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().expect("formatted float parses")
}

fn canonicalize(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64 number");
            serde_json::Number::from_f64(round_sig(x)).map_or(Value::Null, Value::Number)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(canonicalize).collect()),
        Value::Object(map) => {
            let mut entries: Vec<(String, Value)> = map.into_iter().collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            Value::Object(entries.into_iter().map(|(k, v)| (k, canonicalize(v))).collect::<Map<_, _>>())
        }
        other => other,
    }
}

/// Sorted keys, floats at 12 significant digits, `"inf"` for infinity.
pub fn canonical_value<T: Serialize>(x: &T) -> Result<Value, CliError> {
    let v = serde_json::to_value(x).map_err(|e| CliError::Usage(format!("report serialization failed: {e}")))?;
    Ok(canonicalize(v))
}

pub fn canonical_json<T: Serialize>(x: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(&canonical_value(x)?).expect("values always serialize");
    s.push('\n');
    Ok(s)
}

/// Canonical JSON of a report with the `timing` field removed.
pub fn canonical_json_without_timing<T: Serialize>(x: &T) -> Result<String, CliError> {
    let mut v = canonical_value(x)?;
    if let Value::Object(map) = &mut v {
        map.remove("timing");
    }
    Ok(serde_json::to_string_pretty(&v).expect("values always serialize") + "\n")
}

/// Hex SHA-256 of the canonical JSON of `x`.
pub fn digest<T: Serialize>(x: &T) -> Result<String, CliError> {
    let bytes = Sha256::digest(canonical_json(x)?.as_bytes());
    Ok(bytes.iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    }))
}

fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        round_sig(x).to_string()
    }
}

fn fmt_ext(x: ExtReal) -> String {
    if x.is_infinite() {
        "inf".into()
    } else {
        fmt_num(x.value())
    }
}

pub fn trace_csv(rows: &[TraceRow]) -> String {
    let mut out = String::from(TRACE_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(out, "{},{},{},{},{}", r.set.label(), r.n, fmt_ext(r.c_n), fmt_ext(r.ratio), fmt_num(r.norm));
    }
    out
}

pub fn steps_csv(steps: &StepFunction) -> String {
    let mut out = String::from("t_start,t_end,value\n");
    for (lo, hi, v) in steps.steps() {
        let _ = writeln!(out, "{},{},{}", fmt_num(lo), fmt_num(hi), fmt_num(v));
    }
    out
}

/// Writes `bytes` to `path`, or to stdout when `path` is `None`.
pub fn write_output(bytes: &[u8], path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|source| CliError::Io { path: p.display().to_string(), source }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)
                .and_then(|_| out.flush())
                .map_err(|source| CliError::Io { path: "<stdout>".into(), source })
        }
    }
}

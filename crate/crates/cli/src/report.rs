//! Report document and its JSON / CSV renderings.
//!
//! Floats are written with 17 significant digits so that reports diff
//! cleanly against reference values.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub reference: f64,
    pub residual: f64,
    pub tol: f64,
    pub pass: bool,
}

impl Check {
    /// |value − reference| against `tol`.
    pub fn abs(name: impl Into<String>, value: f64, reference: f64, tol: f64) -> Self {
        let residual = (value - reference).abs();
        Self {
            name: name.into(),
            value,
            reference,
            residual,
            tol,
            pass: residual <= tol,
        }
    }

    /// |value/reference − 1| against `tol`.
    pub fn rel(name: impl Into<String>, value: f64, reference: f64, tol: f64) -> Self {
        let residual = (value / reference - 1.0).abs();
        Self {
            name: name.into(),
            value,
            reference,
            residual,
            tol,
            pass: residual <= tol,
        }
    }

    /// |z| against `bound`.
    pub fn z(name: impl Into<String>, z: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            value: z,
            reference: 0.0,
            residual: z.abs(),
            tol: bound,
            pass: z.abs() < bound,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    pub inputs: Value,
    pub results: Vec<Value>,
    pub pass: bool,
    pub runtime_ms: u64,
    pub timestamp: u64,
    pub version: String,
}

pub fn to_json(report: &Report) -> String {
    let value = serde_json::to_value(report).expect("report serializes");
    let mut out = String::new();
    write_json(&value, 0, &mut out);
    out.push('\n');
    out
}

pub fn format_number(n: &serde_json::Number) -> String {
    if n.is_f64() {
        format_float(n.as_f64().unwrap_or(f64::NAN))
    } else {
        n.to_string()
    }
}

pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_json(v: &Value, depth: usize, out: &mut String) {
    let pad = |d: usize| "  ".repeat(d);
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => out.push_str(&format_number(n)),
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) if items.is_empty() => out.push_str("[]"),
        Value::Array(items) => {
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                out.push_str(&pad(depth + 1));
                write_json(item, depth + 1, out);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            let _ = write!(out, "{}]", pad(depth));
        }
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Object(map) => {
            out.push_str("{\n");
            for (i, (k, item)) in map.iter().enumerate() {
                let _ = write!(out, "{}{}: ", pad(depth + 1), Value::String(k.clone()));
                write_json(item, depth + 1, out);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            let _ = write!(out, "{}}}", pad(depth));
        }
    }
}

/// One row per leaf: command, result index, dotted field path, value.
pub fn to_csv(report: &Report) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["command", "result", "field", "value"]).expect("in-memory write");
    for (i, result) in report.results.iter().enumerate() {
        let mut leaves = Vec::new();
        flatten("", result, &mut leaves);
        for (field, value) in leaves {
            w.write_record([report.command.as_str(), &i.to_string(), &field, &value])
                .expect("in-memory write");
        }
    }
    w.write_record([report.command.as_str(), "", "pass", if report.pass { "true" } else { "false" }])
        .expect("in-memory write");
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let join = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(map) => map.iter().for_each(|(k, item)| flatten(&join(k), item, out)),
        Value::Array(items) => items.iter().enumerate().for_each(|(i, item)| flatten(&join(&i.to_string()), item, out)),
        Value::Number(n) => out.push((prefix.to_string(), format_number(n))),
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        Value::Bool(b) => out.push((prefix.to_string(), b.to_string())),
        Value::Null => out.push((prefix.to_string(), String::new())),
    }
}

//! `report`: plain-text tables from a run directory.

use std::fmt::Write;
use std::path::Path;

use serde_json::Value;

use crate::error::CliError;
use crate::run::REPORTS_FILE;

fn s(v: &Value, key: &str) -> String {
    match v.get(key) {
        Some(Value::String(t)) => t.clone(),
        Some(Value::Null) | None => "-".into(),
        Some(other) => other.to_string(),
    }
}

fn sci(v: &Value, key: &str) -> String {
    v.get(key)
        .and_then(Value::as_f64)
        .map_or_else(|| "-".into(), |x| format!("{x:.3e}"))
}

/// Renders `reports.json` from `dir` as aligned text.
pub fn render(dir: &Path) -> Result<String, CliError> {
    let path = dir.join(REPORTS_FILE);
    let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| CliError::Config {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    render_value(&v)
}

pub fn render_value(v: &Value) -> Result<String, CliError> {
    let empty = Vec::new();
    let list = |key: &str| v.get(key).and_then(Value::as_array).unwrap_or(&empty).clone();
    let mut out = String::new();
    let _ = writeln!(out, "{} ({}, T={}, seed={})", s(v, "name"), s(v, "method"), s(v, "steps"), s(v, "seed"));

    let _ = writeln!(out, "\n{:<26} {:<6} {:>11} {:>11}  {:<24} {:>7}", "check", "status", "max", "tolerance", "tolerance name", "worst");
    for c in list("checks") {
        let status = if c.get("pass").and_then(Value::as_bool) == Some(true) { "PASS" } else { "FAIL" };
        let _ = writeln!(
            out,
            "{:<26} {:<6} {:>11} {:>11}  {:<24} {:>7}",
            s(&c, "name"),
            status,
            sci(&c, "max_residual"),
            sci(&c, "tolerance"),
            s(&c, "tolerance_name"),
            s(&c, "worst_index")
        );
    }

    let witnesses = list("witnesses");
    if !witnesses.is_empty() {
        let _ = writeln!(out, "\n{:<22} {:<8} {:<8} {:>8} {:<6}  bound", "witness", "eps", "f", "n", "stable");
        for w in witnesses {
            let bound = w.get("bound").cloned().unwrap_or(Value::Null);
            let bound = match s(&bound, "status").as_str() {
                "exact" => s(&bound, "value"),
                "capped" => format!("capped: {}", s(&bound, "expression")),
                other => other.to_string(),
            };
            let _ = writeln!(
                out,
                "{:<22} {:<8} {:<8} {:>8} {:<6}  {}",
                s(&w, "name"),
                s(&w, "eps"),
                s(&w, "counterfunction"),
                s(&w, "witness"),
                s(&w, "stable_under_bound_plus_one"),
                bound
            );
        }
    }

    let rates = list("rates");
    if !rates.is_empty() {
        let _ = writeln!(out, "\n{:<8} {:<8} {:<44}", "rate", "status", "expression / value");
        for r in rates {
            let detail = match s(&r, "status").as_str() {
                "exact" => format!("{} = {}", s(&r, "expression"), s(&r, "value")),
                "capped" => format!("{} (capped: {})", s(&r, "expression"), s(&r, "reason")),
                _ => format!("{} ({})", s(&r, "expression"), s(&r, "message")),
            };
            let _ = writeln!(out, "{:<8} {:<8} {}", s(&r, "name"), s(&r, "status"), detail);
        }
    }

    for e in list("errors") {
        let _ = writeln!(out, "error: {}", e.as_str().unwrap_or("?"));
    }
    let summary = v.get("summary").cloned().unwrap_or(Value::Null);
    let pass = summary.get("pass").and_then(Value::as_bool) == Some(true);
    let _ = writeln!(out, "\noverall: {}", if pass { "PASS" } else { "FAIL" });
    Ok(out)
}

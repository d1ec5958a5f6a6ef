//! `verify`: reload a recorded trace, re-run the checks on it and compare it
//! against a fresh engine replay.

use std::io::BufRead;
use std::path::Path;

use dykstra_core::diagnostics::CheckReport;
use dykstra_core::{Method, SweepOrder, Trace, Vector};
use serde::Deserialize;

use crate::config::{ExperimentConfig, MethodChoice};
use crate::error::CliError;
use crate::run::{evaluate_checks, run_engine, Reports};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Record {
    n: usize,
    x: Vector,
    q: Vector,
}

pub fn method_of(choice: MethodChoice) -> Method {
    match choice {
        MethodChoice::Dykstra => Method::Dykstra,
        MethodChoice::Map => Method::Map(SweepOrder::Composition),
        MethodChoice::MapCyclic => Method::Map(SweepOrder::Cyclic),
    }
}

/// Parses a JSON-lines trace. The file holds `q_0..q_T`; the earlier
/// corrections `q_{-(m-1)}..q_{-1}` are zero by definition and restored here.
pub fn read_trace<R: BufRead>(reader: R, cfg: &ExperimentConfig) -> Result<Trace, CliError> {
    let dim = cfg.family.dim();
    let m = cfg.family.len();
    let mut xs = Vec::new();
    let mut qs: Vec<Vector> = (0..m - 1).map(|_| Vector::zeros(dim)).collect();
    for (i, line) in reader.lines().enumerate() {
        let bad = |message: String| CliError::Trace { line: i + 1, message };
        let line = line.map_err(|e| bad(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: Record = serde_json::from_str(&line).map_err(|e| bad(e.to_string()))?;
        if rec.n != xs.len() {
            return Err(bad(format!("expected n = {}, found {}", xs.len(), rec.n)));
        }
        if rec.x.dim() != dim || rec.q.dim() != dim {
            return Err(bad(format!("vectors must have dimension {dim}")));
        }
        xs.push(rec.x);
        qs.push(rec.q);
    }
    if xs.is_empty() {
        return Err(CliError::Trace {
            line: 0,
            message: "trace is empty".into(),
        });
    }
    Ok(Trace::from_parts(method_of(cfg.method), cfg.family.clone(), xs, qs)?)
}

/// Largest coordinate difference between a recorded trace and a replay.
fn replay_check(recorded: &Trace, cfg: &ExperimentConfig) -> Result<CheckReport, CliError> {
    let mut cfg = cfg.clone();
    cfg.steps = recorded.steps();
    let fresh = run_engine(&cfg)?;
    let mut report = CheckReport::new("replay", "exact", 0.0).param("steps", cfg.steps);
    for n in 0..=cfg.steps {
        let dx = recorded.x(n).distance(fresh.x(n));
        let dq = recorded.q(n as i64).distance(fresh.q(n as i64));
        report.observe(n, dx.max(dq));
    }
    Ok(report.finish())
}

pub fn verify(trace_path: &Path, cfg: &ExperimentConfig) -> Result<Reports, CliError> {
    let file = std::fs::File::open(trace_path).map_err(|e| CliError::io(trace_path, e))?;
    let trace = read_trace(std::io::BufReader::new(file), cfg)?;
    let mut reports = evaluate_checks(cfg, &trace);
    let replay = replay_check(&trace, cfg)?;
    if !replay.pass {
        reports.summary.checks_failed += 1;
        reports.summary.pass = false;
    }
    reports.checks.insert(0, replay);
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::run::write_trace;
    use crate::scenarios::scenario;

    #[test]
    fn trace_round_trips_bit_for_bit() {
        for name in ["orthant3", "twolines", "affine3"] {
            let mut cfg = scenario(name).unwrap();
            cfg.steps = 50;
            let trace = run_engine(&cfg).unwrap();
            let mut buf = Vec::new();
            write_trace(&trace, &mut buf).unwrap();
            let back = read_trace(buf.as_slice(), &cfg).unwrap();
            assert_eq!(back, trace, "{name}");
        }
    }

    #[test]
    fn out_of_order_records_are_rejected() {
        let cfg = scenario("orthant2").unwrap();
        let text = "{\"n\":0,\"x\":[1,1],\"q\":[0,0]}\n{\"n\":2,\"x\":[1,1],\"q\":[0,0]}\n";
        match read_trace(text.as_bytes(), &cfg) {
            Err(CliError::Trace { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }
}

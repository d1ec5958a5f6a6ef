//! Built-in scenarios. Each one is an ordinary config, so `run --scenario X`
//! and `run x.json` go through the same pipeline.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::config::ExperimentConfig;
use crate::error::CliError;

pub const SCENARIOS: [&str; 5] = ["orthant2", "orthant3", "halfdisc", "twolines", "affine3"];

fn diagnostics(eps_meta: &str, reference: Value, samples: usize) -> Value {
    json!([
        {"kind": "identities"},
        {"kind": "membership"},
        {"kind": "inner_products", "samples": samples},
        {"kind": "q_norm_bound"},
        {"kind": "summability"},
        {"kind": "main_identity", "triples": 50},
        {"kind": "liminf", "eps": "1/1000", "start": 0},
        {"kind": "metastability", "eps": eps_meta, "f": "1"},
        {"kind": "asymptotic_regularity", "eps": "1/100", "f": "3"},
        {"kind": "koh", "eps": "1/2", "trials": 1000},
        {"kind": "finitization", "eps": "1/10", "reference": reference}
    ])
}

fn orthant(m: usize, x0: Vec<f64>, steps: usize) -> Value {
    let sets: Vec<Value> = (0..m)
        .map(|j| {
            let mut a = vec![0.0; m];
            a[j] = 1.0;
            json!({"type": "halfspace", "a": a, "beta": 0.0})
        })
        .collect();
    let zero = vec![0.0; m];
    let mut checks = diagnostics("1/2", json!(zero), 20);
    checks.as_array_mut().unwrap().push(json!({"kind": "target", "point": zero, "tolerance": 1e-12}));
    json!({
        "version": 1,
        "name": format!("orthant{m}"),
        "family": {"sets": sets, "witness": zero},
        "x0": x0,
        "steps": steps,
        "method": "dykstra",
        "seed": 7,
        "checks": checks,
        "rates": [
            {"name": "psi", "B": "4", "eps": "1/4", "f": "0"},
            {"name": "alpha", "b": "2", "m": m, "eps": "1/2", "f": "0"},
            {"name": "omega", "b": "2", "m": m, "eps": "1/2", "f": "1"},
            {"name": "theta", "b": "2", "m": m, "eps": "1/2", "modulus": "orthant"},
            {"name": "kappa", "b": "2", "n": 50, "eps": "1/10"},
            {"name": "modulus", "modulus": format!("orthant:{m}"), "r": "2", "eps": "1/2"}
        ]
    })
}

fn halfdisc() -> Value {
    let mut checks = diagnostics("1/10", json!([1.0, 0.0]), 5);
    checks
        .as_array_mut()
        .unwrap()
        .push(json!({"kind": "target", "point": [1.0, 0.0], "tolerance": 1e-4, "from": 5000}));
    json!({
        "version": 1,
        "name": "halfdisc",
        "family": {"sets": [
            {"type": "halfspace", "a": [0.0, 1.0], "beta": 0.0},
            {"type": "ball", "center": [0.0, 0.0], "radius": 1.0}
        ], "witness": [0.0, 0.0]},
        "x0": [2.0, 2.0],
        "steps": 6000,
        "method": "dykstra",
        "b": "3",
        "seed": 11,
        "checks": checks,
        "rates": [
            {"name": "alpha", "b": "3", "m": 2, "eps": "1/100", "f": "3"},
            {"name": "liminf", "b": "3", "m": 2, "eps": "1/1000", "N": "0"},
            {"name": "modulus", "modulus": "semialgebraic:2,2,1,2", "r": "3", "eps": "1/2"}
        ]
    })
}

fn twolines() -> Value {
    let mut checks = diagnostics("1/10", json!([0.0, 0.0]), 20);
    let list = checks.as_array_mut().unwrap();
    list.push(json!({"kind": "target", "point": [0.0, 0.0], "tolerance": 1e-6, "from": 200}));
    list.push(json!({"kind": "affine_reduction", "sweeps": 200}));
    json!({
        "version": 1,
        "name": "twolines",
        "family": {"sets": [
            {"type": "affine", "basis": [[1.0, 0.0]], "offset": [0.0, 0.0]},
            {"type": "affine", "basis": [[1.0, 1.0]], "offset": [0.0, 0.0]}
        ], "witness": [0.0, 0.0]},
        "x0": [1.0, 0.0],
        "steps": 400,
        "method": "dykstra",
        "seed": 3,
        "checks": checks,
        "rates": [
            {"name": "psi", "B": "1", "eps": "1/2", "f": "0"},
            {"name": "beta", "b": "1", "eps": "2", "delta": "x"}
        ]
    })
}

/// Three seeded random planes in `R^3` through a common seeded point.
fn affine3() -> Value {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut coord = || (rng.gen_range(-1.0f64..1.0) * 1e6).round() / 1e6;
    let point: Vec<f64> = (0..3).map(|_| coord()).collect();
    let sets: Vec<Value> = (0..3)
        .map(|_| {
            let basis: Vec<Vec<f64>> = (0..2).map(|_| (0..3).map(|_| coord()).collect()).collect();
            json!({"type": "affine", "basis": basis, "offset": point})
        })
        .collect();
    let mut checks = diagnostics("1/10", json!(point), 10);
    let list = checks.as_array_mut().unwrap();
    list.push(json!({"kind": "affine_reduction", "sweeps": 200}));
    json!({
        "version": 1,
        "name": "affine3",
        "family": {"sets": sets, "witness": point},
        "x0": [2.0, -1.0, 1.5],
        "steps": 600,
        "method": "dykstra",
        "seed": 5,
        "checks": checks
    })
}

pub fn scenario(name: &str) -> Result<ExperimentConfig, CliError> {
    let value = match name {
        "orthant2" => orthant(2, vec![1.0, 1.0], 1000),
        "orthant3" => orthant(3, vec![1.0, 2.0, 3.0], 1000),
        "halfdisc" => halfdisc(),
        "twolines" => twolines(),
        "affine3" => affine3(),
        other => return Err(CliError::UnknownScenario(other.to_string())),
    };
    ExperimentConfig::from_json(&value.to_string())
}

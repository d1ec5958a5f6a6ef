//! The `run` pipeline: engine, checks, rate queries, artifacts.

use std::io::Write;
use std::path::{Path, PathBuf};

use dykstra_core::diagnostics::{
    check_asymptotic_regularity, check_identities, check_inner_products, check_koh_lemmas, check_main_identity,
    check_membership, check_q_norm_bound, check_summability, find_liminf_witness, find_metastability_witness,
    finitization_replay, CheckReport, WitnessReport, MAIN_IDENTITY_TOLERANCE,
};
use dykstra_core::engine::series;
use dykstra_core::{
    dykstra_run, map_run_with_order, Calculus, Counterfunction, ExactNat, ExactPos, RateBound, SweepOrder, Trace,
    Vector,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{CheckSpec, ExperimentConfig, MethodChoice};
use crate::error::CliError;
use crate::query::{evaluate, Outcome, RateResult};

pub const TRACE_FILE: &str = "trace.jsonl";
pub const SERIES_FILE: &str = "series.csv";
pub const REPORTS_FILE: &str = "reports.json";

#[derive(Clone, Debug, Serialize)]
pub struct WitnessEntry {
    #[serde(flatten)]
    pub report: WitnessReport,
    /// Re-running the search with `bound + 1` gave the same witness.
    pub stable_under_bound_plus_one: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub checks_failed: usize,
    pub witnesses_failed: usize,
    pub rates_capped: usize,
    pub errors: usize,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Reports {
    pub name: String,
    pub method: MethodChoice,
    pub steps: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<String>,
    pub checks: Vec<CheckReport>,
    pub witnesses: Vec<WitnessEntry>,
    pub rates: Vec<RateResult>,
    pub errors: Vec<String>,
    pub summary: Summary,
}

impl Reports {
    pub fn exit_code(&self) -> i32 {
        if self.summary.pass {
            0
        } else {
            1
        }
    }

    pub fn check(&self, name: &str) -> Option<&CheckReport> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}

pub fn run_engine(cfg: &ExperimentConfig) -> Result<Trace, CliError> {
    Ok(match cfg.method {
        MethodChoice::Dykstra => dykstra_run(&cfg.family, &cfg.x0, cfg.steps)?,
        MethodChoice::Map => map_run_with_order(&cfg.family, &cfg.x0, cfg.steps, SweepOrder::Composition)?,
        MethodChoice::MapCyclic => map_run_with_order(&cfg.family, &cfg.x0, cfg.steps, SweepOrder::Cyclic)?,
    })
}

fn override_tolerance(mut r: CheckReport, tolerance: Option<f64>) -> CheckReport {
    if let Some(t) = tolerance {
        r.tolerance = t;
        r.tolerance_name = "configured".into();
        r.pass = r.max_residual <= t;
    }
    r
}

fn need_b(cfg: &ExperimentConfig, what: &str) -> Result<ExactNat, CliError> {
    cfg.bound_b().ok_or_else(|| CliError::Invalid {
        field: "b".into(),
        message: format!("{what} needs b or a family witness"),
    })
}

fn need_witness<'a>(cfg: &'a ExperimentConfig, what: &str) -> Result<&'a Vector, CliError> {
    cfg.family.witness().ok_or_else(|| CliError::Invalid {
        field: "family.witness".into(),
        message: format!("{what} needs a witness point"),
    })
}

fn nat_f64(n: &ExactNat) -> f64 {
    ExactPos::from_nat(n).map(|p| p.to_f64()).unwrap_or(0.0)
}

fn parse_f(f: &str) -> Result<Counterfunction, CliError> {
    Counterfunction::parse(f).map_err(|e| CliError::Invalid {
        field: "checks.f".into(),
        message: e.to_string(),
    })
}

fn main_identity_batch(cfg: &ExperimentConfig, trace: &Trace, triples: usize) -> Result<CheckReport, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x6d61_696e);
    let centre = cfg.family.witness().cloned().unwrap_or_else(|| cfg.x0.clone());
    let radius = cfg.bound_b().map(|b| nat_f64(&b)).unwrap_or(1.0).max(1.0);
    let mut report = CheckReport::new("main_identity", "1e-8*(1+|x0|^2+|z|^2)", MAIN_IDENTITY_TOLERANCE)
        .param("triples", triples)
        .param("seed", cfg.seed);
    let steps = trace.steps();
    for t in 0..triples {
        let dir: Vec<f64> = (0..centre.dim()).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let z = centre.axpy(radius * if t % 10 == 9 { 100.0 } else { 1.0 }, &Vector::new(dir)?);
        let n = rng.gen_range(0..=steps);
        let i = rng.gen_range(n..=steps);
        let r = check_main_identity(trace, &z, n, i)?;
        report.observe(t, r.max_residual / r.tolerance * MAIN_IDENTITY_TOLERANCE);
        if !r.pass {
            report.note = Some(format!("first failure at n={n}, i={i}"));
        }
    }
    Ok(report.finish())
}

fn target_check(trace: &Trace, point: &Vector, tolerance: f64, from: Option<usize>) -> Result<CheckReport, CliError> {
    point.check_dim(trace.family().dim())?;
    let steps = trace.steps();
    let start = from.unwrap_or(steps);
    if start > steps {
        return Err(CliError::Invalid {
            field: "checks.target.from".into(),
            message: format!("from = {start} is past the last step {steps}"),
        });
    }
    let mut report = CheckReport::new("target", "configured", tolerance)
        .param("point", format!("{point}"))
        .param("from", start);
    for n in start..=steps {
        report.observe(n, trace.x(n).distance(point));
    }
    report.note = Some(format!("final distance {:.6e}", trace.last().distance(point)));
    Ok(report.finish())
}

/// Dykstra's iterate at the end of sweep `k` against `k` cyclic MAP sweeps.
pub fn affine_reduction(cfg: &ExperimentConfig, sweeps: usize, tolerance: Option<f64>) -> Result<CheckReport, CliError> {
    let m = cfg.family.len();
    let d = dykstra_run(&cfg.family, &cfg.x0, sweeps * m)?;
    let p = map_run_with_order(&cfg.family, &cfg.x0, sweeps, SweepOrder::Cyclic)?;
    let mut report = CheckReport::new("affine_reduction", "1e-9", 1e-9).param("sweeps", sweeps);
    for k in 0..=sweeps {
        report.observe(k, d.x(k * m).distance(p.x(k)));
    }
    if !cfg.family.all_affine() {
        report.note = Some("family is not affine; agreement is not expected".into());
    }
    Ok(override_tolerance(report.finish(), tolerance))
}

fn stable(first: &WitnessReport, rerun: &WitnessReport) -> bool {
    first.witness == rerun.witness
}

/// Runs every configured check on `trace`. Errors in one check are recorded
/// and do not stop the others.
pub fn evaluate_checks(cfg: &ExperimentConfig, trace: &Trace) -> Reports {
    let calc = Calculus::new(cfg.caps());
    let m = trace.m() as u64;
    let mut checks = Vec::new();
    let mut witnesses = Vec::new();
    let mut errors = Vec::new();

    for spec in &cfg.checks {
        let outcome: Result<(), CliError> = (|| {
            match spec {
                CheckSpec::Identities { tolerance } => checks.push(override_tolerance(check_identities(trace), *tolerance)),
                CheckSpec::Membership { tolerance } => {
                    checks.push(override_tolerance(check_membership(trace)?, *tolerance))
                }
                CheckSpec::InnerProducts { samples, tolerance } => checks.push(override_tolerance(
                    check_inner_products(trace, *samples, cfg.seed),
                    *tolerance,
                )),
                CheckSpec::QNormBound { tolerance } => {
                    checks.push(override_tolerance(check_q_norm_bound(trace), *tolerance))
                }
                CheckSpec::Summability { tolerance } => {
                    let p = need_witness(cfg, "summability")?;
                    let b = need_b(cfg, "summability")?;
                    checks.push(override_tolerance(check_summability(trace, p, &b)?, *tolerance))
                }
                CheckSpec::MainIdentity { triples, tolerance } => {
                    checks.push(override_tolerance(main_identity_batch(cfg, trace, *triples)?, *tolerance))
                }
                CheckSpec::Koh { eps, trials } => {
                    let b = need_b(cfg, "koh")?;
                    checks.push(check_koh_lemmas(&cfg.family, &b, eps.0.to_f64(), *trials, cfg.seed)?)
                }
                CheckSpec::Target { point, tolerance, from } => {
                    checks.push(target_check(trace, point, *tolerance, *from)?)
                }
                CheckSpec::AffineReduction { sweeps, tolerance } => {
                    checks.push(affine_reduction(cfg, *sweeps, *tolerance)?)
                }
                CheckSpec::Finitization { eps, reference } => {
                    let b = need_b(cfg, "finitization")?;
                    checks.push(finitization_replay(trace, eps.0.to_f64(), nat_f64(&b), reference)?)
                }
                CheckSpec::Liminf { eps, start } => {
                    let b = need_b(cfg, "liminf")?;
                    let n = ExactNat::from(*start);
                    let bound = RateBound::from_result(
                        format!("Phi(b={b}, m={m}, eps={}, N={start})", eps.0),
                        calc.big_phi(&b, m, &eps.0, &n),
                    );
                    let first = find_liminf_witness(trace, &eps.0, *start, &bound)?;
                    let again = find_liminf_witness(trace, &eps.0, *start, &bound.incremented())?;
                    witnesses.push(WitnessEntry {
                        stable_under_bound_plus_one: stable(&first, &again),
                        report: first,
                    });
                }
                CheckSpec::Metastability { eps, f } => {
                    let b = need_b(cfg, "metastability")?;
                    let f = parse_f(f)?;
                    let bound = RateBound::from_result(
                        format!("Omega(b={b}, m={m}, eps={}, f={f})", eps.0),
                        calc.omega(&b, m, &eps.0, &f),
                    );
                    let first = find_metastability_witness(trace, &eps.0, &f, &bound, &calc);
                    let again = find_metastability_witness(trace, &eps.0, &f, &bound.incremented(), &calc);
                    witnesses.push(WitnessEntry {
                        stable_under_bound_plus_one: stable(&first, &again),
                        report: first,
                    });
                }
                CheckSpec::AsymptoticRegularity { eps, f } => {
                    let b = need_b(cfg, "asymptotic_regularity")?;
                    let f = parse_f(f)?;
                    let r = check_asymptotic_regularity(trace, &eps.0, &f, &b, &calc);
                    // The scan is exhaustive from 0, so a larger bound cannot move the witness.
                    for report in [r.residual, r.step_norm] {
                        witnesses.push(WitnessEntry {
                            stable_under_bound_plus_one: true,
                            report,
                        });
                    }
                }
            }
            Ok(())
        })();
        if let Err(e) = outcome {
            errors.push(format!("{}: {e}", check_kind(spec)));
        }
    }

    let rates: Vec<RateResult> = cfg.rates.iter().map(|q| evaluate(q, &calc)).collect();
    let checks_failed = checks.iter().filter(|c| !c.pass).count();
    let witnesses_failed = witnesses
        .iter()
        .filter(|w| w.report.failed() || !w.stable_under_bound_plus_one)
        .count();
    let rates_capped = rates.iter().filter(|r| matches!(r.outcome, Outcome::Capped { .. })).count();
    errors.extend(rates.iter().filter(|r| r.is_error()).map(|r| format!("rate {}: {}", r.name, r.expression)));
    let summary = Summary {
        checks_failed,
        witnesses_failed,
        rates_capped,
        errors: errors.len(),
        pass: checks_failed == 0 && witnesses_failed == 0 && errors.is_empty(),
    };
    Reports {
        name: cfg.name.clone(),
        method: cfg.method,
        steps: cfg.steps,
        seed: cfg.seed,
        b: cfg.bound_b().map(|b| b.to_string()),
        checks,
        witnesses,
        rates,
        errors,
        summary,
    }
}

fn check_kind(spec: &CheckSpec) -> String {
    serde_json::to_value(spec)
        .ok()
        .and_then(|v| v.get("kind").and_then(|k| k.as_str()).map(str::to_string))
        .unwrap_or_else(|| "check".into())
}

fn fmt_num(v: f64) -> String {
    // Adding 0.0 turns -0.0 into 0.0.
    format!("{:.16e}", v + 0.0)
}

fn fmt_vec(v: &Vector) -> String {
    let parts: Vec<String> = v.as_slice().iter().map(|x| fmt_num(*x)).collect();
    format!("[{}]", parts.join(","))
}

/// One JSON object per step: `{"n": n, "x": [...], "q": [...]}` with `q_0 = 0`.
pub fn write_trace<W: Write>(trace: &Trace, mut w: W) -> std::io::Result<()> {
    for n in 0..=trace.steps() {
        writeln!(w, "{{\"n\":{n},\"x\":{},\"q\":{}}}", fmt_vec(trace.x(n)), fmt_vec(trace.q(n as i64)))?;
    }
    w.flush()
}

pub fn write_series<W: Write>(trace: &Trace, w: W) -> Result<(), CliError> {
    let s = series(trace);
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["n".to_string(), "step_norm".to_string()];
    header.extend((1..=trace.m()).map(|j| format!("residual_{j}")));
    header.push("s_n".into());
    header.push("window_sum".into());
    out.write_record(&header)?;
    for n in 0..s.len() {
        let mut row = vec![n.to_string(), fmt_num(s.step_norms[n])];
        row.extend(s.residuals[n].iter().map(|r| fmt_num(*r)));
        row.push(fmt_num(s.partial_sums[n]));
        row.push(fmt_num(s.window_sums[n]));
        out.write_record(&row)?;
    }
    out.flush().map_err(|e| CliError::Csv(e.into()))
}

pub struct RunOutcome {
    pub dir: PathBuf,
    pub reports: Reports,
}

/// Resolves the artifact directory for `cfg` under `root`.
pub fn output_dir(cfg: &ExperimentConfig, root: &Path) -> PathBuf {
    root.join(cfg.output.dir.clone().unwrap_or_else(|| PathBuf::from(&cfg.name)))
}

fn write_file(path: &Path, f: impl FnOnce(std::io::BufWriter<std::fs::File>) -> Result<(), CliError>) -> Result<(), CliError> {
    let file = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    f(std::io::BufWriter::new(file))
}

/// Runs the whole pipeline and writes `trace.jsonl`, `series.csv` and
/// `reports.json` into the output directory.
pub fn run(cfg: &ExperimentConfig, root: &Path) -> Result<RunOutcome, CliError> {
    let trace = run_engine(cfg)?;
    let reports = evaluate_checks(cfg, &trace);
    let dir = output_dir(cfg, root);
    std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    if cfg.output.trace {
        let path = dir.join(TRACE_FILE);
        write_file(&path, |w| write_trace(&trace, w).map_err(|e| CliError::io(&path, e)))?;
    }
    if cfg.output.series {
        write_file(&dir.join(SERIES_FILE), |w| write_series(&trace, w))?;
    }
    let path = dir.join(REPORTS_FILE);
    std::fs::write(&path, reports.to_json()).map_err(|e| CliError::io(&path, e))?;
    Ok(RunOutcome { dir, reports })
}

/// Runs several configs on separate threads; each writes only its own
/// directory. Results come back in input order.
pub fn run_batch(cfgs: &[ExperimentConfig], root: &Path) -> Vec<Result<RunOutcome, CliError>> {
    std::thread::scope(|s| {
        let handles: Vec<_> = cfgs.iter().map(|c| s.spawn(move || run(c, root))).collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("scenario thread panicked"))
            .collect()
    })
}

use num_traits::ToPrimitive;
use serde::Serialize;

use crate::engine::Trace;
use crate::error::DiagnosticsError;
use crate::exact::{ExactNat, ExactPos};
use crate::rates::{Calculus, Counterfunction, RateBound};
use crate::vector::Vector;

use super::{CheckReport, WitnessReport};

/// `sum_{k=n-m+1}^{n} |<x_k - x_n, q_k>|`, recomputed from scratch.
fn liminf_quantity(trace: &Trace, n: usize) -> f64 {
    let m = trace.m() as i64;
    let xn = trace.x(n);
    let mut total = 0.0;
    for k in (n as i64 - m + 1)..=(n as i64) {
        let xk = trace.x_ext(k);
        let q = trace.q(k);
        let mut dot = 0.0;
        for (a, (b, c)) in xk.as_slice().iter().zip(xn.as_slice().iter().zip(q.as_slice())) {
            dot += (a - b) * c;
        }
        total += dot.abs();
    }
    total
}

/// `max_{i,j in [n; n+w]} |x_i - x_j|`, by full pairwise comparison.
pub fn window_diameter(trace: &Trace, n: usize, w: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for i in n..=n + w {
        for j in i + 1..=n + w {
            worst = worst.max(trace.x(i).distance(trace.x(j)));
        }
    }
    worst
}

/// Whether the window diameter is at most `eps`, with early exits.
fn window_within(trace: &Trace, n: usize, w: usize, eps: f64) -> bool {
    let centre = trace.x(n);
    if (n..=n + w).all(|i| trace.x(i).distance(centre) <= eps / 2.0) {
        return true;
    }
    for i in n..=n + w {
        for j in i + 1..=n + w {
            if trace.x(i).distance(trace.x(j)) > eps {
                return false;
            }
        }
    }
    true
}

fn counterfunction_width(f: &Counterfunction, n: usize, calc: &Calculus) -> Option<usize> {
    f.eval(&ExactNat::from(n), &calc.caps).ok()?.to_usize()
}

fn report_skeleton(name: &str, eps: &ExactPos, f: &str, start: usize, bound: &RateBound) -> WitnessReport {
    WitnessReport {
        name: name.into(),
        eps: eps.to_string(),
        counterfunction: f.into(),
        witness: None,
        start,
        scanned_to: None,
        bound: bound.clone(),
        bound_respected: None,
        partial: false,
        verified: false,
        note: None,
    }
}

/// Settles `bound_respected`, `partial` and the note once the scan is done.
/// `limit` is the last index the bound allows (`None` if capped), `last` the
/// last candidate the trace could support.
fn conclude(report: &mut WitnessReport, limit: Option<usize>, last: Option<usize>) {
    match (report.witness, limit) {
        (Some(w), Some(l)) => report.bound_respected = Some(w <= l),
        (None, Some(l)) => {
            if last.is_some_and(|t| t >= l) {
                report.bound_respected = Some(false);
            } else {
                report.partial = true;
                report.note = Some("bound reaches past the trace; no witness in scanned range".into());
            }
        }
        (w, None) => {
            report.partial = w.is_none();
            report.note = Some("bound not checkable at desk scale".into());
        }
    }
}

/// Least `n` in `[N; N + bound]` with `sum_{k=n-m+1}^{n} |<x_k - x_n, q_k>| <= eps`.
pub fn find_liminf_witness(
    trace: &Trace,
    eps: &ExactPos,
    start: usize,
    bound: &RateBound,
) -> Result<WitnessReport, DiagnosticsError> {
    let steps = trace.steps();
    if start > steps {
        return Err(DiagnosticsError::IndexOutOfRange { index: start, steps });
    }
    let e = eps.to_f64();
    let mut report = report_skeleton("liminf", eps, "-", start, bound);
    let limit = bound
        .exact()
        .and_then(|b| b.to_usize())
        .map(|b| start.saturating_add(b));
    let end = limit.map_or(steps, |l| l.min(steps));
    for n in start..=end {
        report.scanned_to = Some(n);
        if crate::engine::window_sum(trace, n) <= e {
            report.witness = Some(n);
            report.verified = liminf_quantity(trace, n) <= e;
            break;
        }
    }
    let last = Some(steps);
    if bound.is_capped() || (bound.exact().is_some() && limit.is_none()) {
        conclude(&mut report, None, last);
    } else {
        conclude(&mut report, limit, last);
    }
    Ok(report)
}

/// Least `n <= bound` with `|x_i - x_j| <= eps` for all `i, j` in `[n; n + f(n)]`.
pub fn find_metastability_witness(
    trace: &Trace,
    eps: &ExactPos,
    f: &Counterfunction,
    bound: &RateBound,
    calc: &Calculus,
) -> WitnessReport {
    let steps = trace.steps();
    let e = eps.to_f64();
    let mut report = report_skeleton("metastability", eps, &f.to_string(), 0, bound);
    let limit = bound.exact().and_then(|b| b.to_usize());
    let end = limit.map_or(steps, |l| l.min(steps));
    let mut last_supported = None;
    for n in 0..=end {
        let w = match counterfunction_width(f, n, calc) {
            Some(w) if n + w <= steps => w,
            // f is monotone, so no later window fits either.
            _ => break,
        };
        last_supported = Some(n);
        report.scanned_to = Some(n);
        if window_within(trace, n, w, e) {
            report.witness = Some(n);
            report.verified = window_diameter(trace, n, w) <= e;
            break;
        }
    }
    let bound_capped = bound.is_capped() || (bound.exact().is_some() && limit.is_none());
    conclude(&mut report, if bound_capped { None } else { limit }, last_supported);
    report
}

/// Residual and step-norm forms of asymptotic regularity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AsymptoticRegularityReport {
    /// All `m` residuals `|x_k - P_j(x_k)| <= eps` on `[n; n + f(n)]`, with
    /// bound `alpha(b, m, eps, f)`.
    pub residual: WitnessReport,
    /// `|x_k - x_{k+1}| <= eps` on `[n; n + f(n)]`, with bound `Psi(b^2, eps^2, f)`.
    pub step_norm: WitnessReport,
}

impl AsymptoticRegularityReport {
    pub fn failed(&self) -> bool {
        self.residual.failed() || self.step_norm.failed()
    }
}

fn scan_windows(
    report: &mut WitnessReport,
    values: &[f64],
    eps: f64,
    f: &Counterfunction,
    limit: Option<usize>,
    calc: &Calculus,
) -> Option<usize> {
    let end = limit.map_or(values.len().saturating_sub(1), |l| l.min(values.len().saturating_sub(1)));
    let mut last_supported = None;
    if values.is_empty() {
        return None;
    }
    for n in 0..=end {
        let w = match counterfunction_width(f, n, calc) {
            Some(w) if n + w < values.len() => w,
            _ => break,
        };
        last_supported = Some(n);
        report.scanned_to = Some(n);
        if values[n..=n + w].iter().all(|v| *v <= eps) {
            report.witness = Some(n);
            break;
        }
    }
    last_supported
}

/// Least-witness scans for asymptotic regularity, with their bounds.
pub fn check_asymptotic_regularity(
    trace: &Trace,
    eps: &ExactPos,
    f: &Counterfunction,
    b: &ExactNat,
    calc: &Calculus,
) -> AsymptoticRegularityReport {
    let m = trace.m() as u64;
    let e = eps.to_f64();
    let fam = trace.family();
    let residuals: Vec<f64> = trace
        .xs()
        .iter()
        .map(|x| {
            fam.sets()
                .iter()
                .map(|s| x.distance(&s.project_unchecked(x)))
                .fold(0.0, f64::max)
        })
        .collect();
    let steps: Vec<f64> = trace.xs().windows(2).map(|w| w[0].distance(&w[1])).collect();

    let alpha = RateBound::from_result(
        format!("alpha(b={b}, m={m}, eps={eps}, f={f})"),
        calc.alpha(b, m, eps, f),
    );
    let psi = RateBound::from_result(
        format!("Psi(B={b}^2, eps=({eps})^2, f={f})"),
        ExactPos::from_nat(&(b * b))
            .and_then(|bb| calc.psi(&bb, &eps.square(), f)),
    );

    let mut residual = report_skeleton("asymptotic_regularity", eps, &f.to_string(), 0, &alpha);
    let limit = alpha.exact().and_then(|v| v.to_usize());
    let last = scan_windows(&mut residual, &residuals, e, f, limit, calc);
    if let Some(n) = residual.witness {
        let w = counterfunction_width(f, n, calc).unwrap_or(0);
        residual.verified = (n..=n + w).all(|k| {
            fam.sets()
                .iter()
                .all(|s| trace.x(k).distance(&s.project_unchecked(trace.x(k))) <= e)
        });
    }
    conclude(&mut residual, if alpha.is_capped() { None } else { limit }, last);

    let mut step_norm = report_skeleton("step_norm_regularity", eps, &f.to_string(), 0, &psi);
    let limit = psi.exact().and_then(|v| v.to_usize());
    let last = scan_windows(&mut step_norm, &steps, e, f, limit, calc);
    if let Some(n) = step_norm.witness {
        let w = counterfunction_width(f, n, calc).unwrap_or(0);
        step_norm.verified = (n..=n + w).all(|k| trace.x(k).distance(trace.x(k + 1)) <= e);
    }
    conclude(&mut step_norm, if psi.is_capped() { None } else { limit }, last);

    AsymptoticRegularityReport { residual, step_norm }
}

/// Replays the argument that the limit of the iteration is the projection of
/// `x0` onto the intersection, on a finite trace:
///
/// 1. the tail settles: `|x_n - x_T| <= min{eps^2/(8b), eps/2}` for `n >= N0`;
/// 2. a liminf witness `n0 >= N0` with window sum `<= eps^2/8`;
/// 3. at the supplied reference point `r` (the projection of `x0`),
///    `<r - x_{n0}, r - x0> <= eps^2/8` and `|r - x_{n0}| <= eps/2`.
///
/// Passes when every link holds and `|x_T - r| <= eps`.
pub fn finitization_replay(
    trace: &Trace,
    eps: f64,
    b: f64,
    reference: &Vector,
) -> Result<CheckReport, DiagnosticsError> {
    if !(eps > 0.0 && b > 0.0) {
        return Err(DiagnosticsError::InvalidInput("eps and b must be positive".into()));
    }
    reference.check_dim(trace.family().dim())?;
    let tol = 1e-9 * (1.0 + trace.x0().norm_squared());
    let mut report = CheckReport::new("finitization_replay", "eps", eps)
        .param("eps", eps)
        .param("b", b);
    let z = trace.last();
    let settle = (eps * eps / (8.0 * b)).min(eps / 2.0);
    let steps = trace.steps();
    let mut n_settle = steps;
    while n_settle > 0 && trace.x(n_settle - 1).distance(z) <= settle {
        n_settle -= 1;
    }
    let n0 = (n_settle..=steps).find(|&n| liminf_quantity(trace, n) <= eps * eps / 8.0);
    let limit_residual = trace.family().max_residual(z)?;
    report.params.insert("settle_index".into(), n_settle.to_string());
    report.params.insert("limit_residual".into(), format!("{limit_residual:.3e}"));
    let Some(n0) = n0 else {
        report.note = Some("no liminf witness after the settling index".into());
        report.observe(steps, f64::INFINITY);
        return Ok(report.finish());
    };
    let xn0 = trace.x(n0);
    let kolmogorov = (reference - xn0).dot(&(reference - trace.x0()));
    let near = reference.distance(xn0);
    let chain_ok = kolmogorov <= eps * eps / 8.0 + tol && near <= eps / 2.0 + tol;
    report.params.insert("liminf_witness".into(), n0.to_string());
    report.params.insert("kolmogorov_term".into(), format!("{kolmogorov:.3e}"));
    report.params.insert("dist_reference_witness".into(), format!("{near:.3e}"));
    if !chain_ok {
        report.note = Some("a link of the chain failed".into());
        report.observe(n0, f64::INFINITY);
        return Ok(report.finish());
    }
    report.observe(steps, z.distance(reference));
    Ok(report.finish())
}

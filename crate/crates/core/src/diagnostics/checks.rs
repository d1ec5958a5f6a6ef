use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::engine::Trace;
use crate::error::DiagnosticsError;
use crate::exact::ExactNat;
use crate::sets::{MEMBERSHIP_TOLERANCE, WITNESS_TOLERANCE};
use crate::vector::Vector;

use super::{
    CheckReport, IDENTITY_TOLERANCE, INEQUALITY_TOLERANCE, INNER_PRODUCT_TOLERANCE,
    MAIN_IDENTITY_TOLERANCE,
};

fn sum_q(trace: &Trace, from: i64, to: i64) -> Vector {
    let mut acc = Vector::zeros(trace.family().dim());
    for k in from..=to {
        acc = &acc + trace.q(k);
    }
    acc
}

/// `x_{n-1} - x_n = q_n - q_{n-m}` and `x_0 - x_n = sum_{k=n-m+1}^{n} q_k`
/// for every `n` in the trace.
pub fn check_identities(trace: &Trace) -> CheckReport {
    let m = trace.m() as i64;
    let tol = IDENTITY_TOLERANCE * (1.0 + trace.x0().norm());
    let mut report = CheckReport::new("identities", "1e-10*(1+|x0|)", tol)
        .param("steps", trace.steps())
        .param("m", m);
    let mut worst_i = 0.0f64;
    let mut worst_ii = 0.0f64;
    for n in 1..=trace.steps() {
        let ni = n as i64;
        let lhs = trace.x(n - 1) - trace.x(n);
        let rhs = trace.q(ni) - trace.q(ni - m);
        let r1 = lhs.distance(&rhs);
        let r2 = (trace.x0() - trace.x(n)).distance(&sum_q(trace, ni - m + 1, ni));
        worst_i = worst_i.max(r1);
        worst_ii = worst_ii.max(r2);
        report.observe(n, r1.max(r2));
    }
    report
        .param("max_step_identity", format!("{worst_i:.3e}"))
        .param("max_sum_identity", format!("{worst_ii:.3e}"))
        .finish()
}

/// `x_n` lies in the set used at step `n`.
pub fn check_membership(trace: &Trace) -> Result<CheckReport, DiagnosticsError> {
    let tol = MEMBERSHIP_TOLERANCE * (1.0 + trace.x0().norm());
    let mut report = CheckReport::new("membership", "1e-10*(1+|x0|)", tol).param("steps", trace.steps());
    if !matches!(trace.method(), crate::engine::Method::Dykstra) {
        report.note = Some("not a Dykstra trace; checks the last set of each sweep".into());
    }
    for n in 1..=trace.steps() {
        let set = match trace.method() {
            crate::engine::Method::Dykstra => trace.family().set_for_step(n),
            crate::engine::Method::Map(order) => match order {
                crate::engine::SweepOrder::Composition => &trace.family().sets()[0],
                crate::engine::SweepOrder::Cyclic => trace.family().sets().last().expect("m >= 2"),
            },
        };
        report.observe(n, set.membership_violation(trace.x(n))?);
    }
    Ok(report.finish())
}

/// `<x_n - z, q_n> >= 0` for sampled `z` in the set of step `n`, and
/// `<x_n - x_{n+m}, q_n> >= 0`. The residual is the magnitude of the most
/// negative value.
pub fn check_inner_products(trace: &Trace, samples: usize, seed: u64) -> CheckReport {
    let m = trace.m();
    let x0 = trace.x0();
    let tol = INNER_PRODUCT_TOLERANCE * (1.0 + x0.norm_squared());
    let mut report = CheckReport::new("inner_products", "1e-9*(1+|x0|^2)", tol)
        .param("samples_per_step", samples)
        .param("seed", seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = 1.0 + x0.norm();
    let mut min_sampled = f64::INFINITY;
    let mut min_shifted = f64::INFINITY;
    for n in 1..=trace.steps() {
        let q = trace.q(n as i64);
        let xn = trace.x(n);
        let set = trace.family().set_for_step(n);
        let mut worst = f64::INFINITY;
        let mut probe = |z: &Vector| worst = worst.min((xn - z).dot(q));
        probe(&set.project_unchecked(x0));
        if let Some(p) = trace.family().witness() {
            probe(p);
        }
        for k in 0..samples {
            let s = scale * 10f64.powi(-((k % 5) as i32));
            let z = set.sample_member(&mut rng, xn, s);
            probe(&z);
        }
        min_sampled = min_sampled.min(worst);
        if n + m <= trace.steps() {
            let v = (xn - trace.x(n + m)).dot(q);
            min_shifted = min_shifted.min(v);
            worst = worst.min(v);
        }
        report.observe(n, (-worst).max(0.0));
    }
    report.params.insert("min_sampled".into(), format!("{min_sampled:.3e}"));
    report.params.insert("min_shifted".into(), format!("{min_shifted:.3e}"));
    if trace.all_q_zero() {
        report.note = Some("q all zero".into());
    }
    report.finish()
}

/// `sum_{k=n-m+1}^{n} |q_k| <= sum_{k=0}^{n-1} |x_k - x_{k+1}|` for all `n`.
pub fn check_q_norm_bound(trace: &Trace) -> CheckReport {
    let m = trace.m() as i64;
    let mut report = CheckReport::new("q_norm_bound", "1e-9", INEQUALITY_TOLERANCE).param("steps", trace.steps());
    let mut path = 0.0;
    for n in 0..=trace.steps() {
        if n > 0 {
            path += trace.x(n - 1).distance(trace.x(n));
        }
        let ni = n as i64;
        let q_sum: f64 = (ni - m + 1..=ni).map(|k| trace.q(k).norm()).sum();
        report.observe(n, (q_sum - path).max(0.0));
    }
    report.finish()
}

/// `|x_n - p| <= b` and `sum_{k=0}^{n} |x_k - x_{k+1}|^2 <= b^2` for all `n`.
/// Requires `p` in every set and `b >= |x0 - p|`.
pub fn check_summability(trace: &Trace, p: &Vector, b: &ExactNat) -> Result<CheckReport, DiagnosticsError> {
    p.check_dim(trace.family().dim())?;
    for (j, set) in trace.family().sets().iter().enumerate() {
        let d = set.distance(p)?;
        if d > WITNESS_TOLERANCE {
            return Err(DiagnosticsError::InvalidWitness(format!(
                "p is at distance {d:.3e} from set {}",
                j + 1
            )));
        }
    }
    let bf = crate::exact::ExactPos::from_nat(b)
        .map_err(|_| DiagnosticsError::InvalidWitness("b must be at least 1".into()))?
        .to_f64();
    let start = trace.x0().distance(p);
    if start > bf {
        return Err(DiagnosticsError::InvalidWitness(format!(
            "b = {b} is below |x0 - p| = {start:.6}"
        )));
    }
    let mut report = CheckReport::new("summability", "1e-9", INEQUALITY_TOLERANCE)
        .param("b", b)
        .param("dist_x0_p", format!("{start:.6e}"));
    let mut sq = 0.0;
    let mut max_dist: f64 = 0.0;
    for n in 0..=trace.steps() {
        let dist = trace.x(n).distance(p);
        max_dist = max_dist.max(dist);
        let mut r = dist - bf;
        if n < trace.steps() {
            let step = trace.x(n).distance(trace.x(n + 1));
            sq += step * step;
            r = r.max(sq - bf * bf);
        }
        report.observe(n, r.max(0.0));
    }
    Ok(report
        .param("max_dist", format!("{max_dist:.6e}"))
        .param("sum_sq_steps", format!("{sq:.6e}"))
        .finish())
}

/// Both sides of the main identity for given `z`, `n <= i`, plus the
/// slack of the derived inequality
/// `|x_i - z|^2 <= |x_n - z|^2 + 2 S_n - 2 S_i` (nonnegative when it holds).
#[derive(Clone, Debug, PartialEq)]
pub struct MainIdentitySides {
    pub lhs: f64,
    pub rhs: f64,
    pub inequality_slack: f64,
}

pub fn main_identity_sides(
    trace: &Trace,
    z: &Vector,
    n: usize,
    i: usize,
) -> Result<MainIdentitySides, DiagnosticsError> {
    let steps = trace.steps();
    if i > steps {
        return Err(DiagnosticsError::IndexOutOfRange { index: i, steps });
    }
    if n > i {
        return Err(DiagnosticsError::InvalidInput(format!("need i >= n, got n={n}, i={i}")));
    }
    z.check_dim(trace.family().dim())?;
    let m = trace.m() as i64;
    let window = |j: i64| -> f64 {
        (j - m + 1..=j)
            .map(|k| (trace.x_ext(k) - z).dot(trace.q(k)))
            .sum()
    };
    let (ni, ii) = (n as i64, i as i64);
    let lhs = (trace.x(n) - z).norm_squared();
    let mut middle = 0.0;
    for k in ni..ii {
        let step = trace.x_ext(k).distance(trace.x_ext(k + 1));
        let cross = (trace.x_ext(k - m + 1) - trace.x_ext(k + 1)).dot(trace.q(k - m + 1));
        middle += step * step + 2.0 * cross;
    }
    let s_n = window(ni);
    let s_i = window(ii);
    let xi_z = (trace.x(i) - z).norm_squared();
    let rhs = xi_z + middle + 2.0 * s_i - 2.0 * s_n;
    Ok(MainIdentitySides {
        lhs,
        rhs,
        inequality_slack: lhs + 2.0 * s_n - 2.0 * s_i - xi_z,
    })
}

/// The main identity at `(z, n, i)` and its inequality consequence.
pub fn check_main_identity(trace: &Trace, z: &Vector, n: usize, i: usize) -> Result<CheckReport, DiagnosticsError> {
    let sides = main_identity_sides(trace, z, n, i)?;
    let tol = MAIN_IDENTITY_TOLERANCE * (1.0 + trace.x0().norm_squared() + z.norm_squared());
    let mut report = CheckReport::new("main_identity", "1e-8*(1+|x0|^2+|z|^2)", tol)
        .param("n", n)
        .param("i", i)
        .param("lhs", format!("{:.6e}", sides.lhs))
        .param("rhs", format!("{:.6e}", sides.rhs))
        .param("inequality_slack", format!("{:.6e}", sides.inequality_slack));
    report.observe(i, (sides.lhs - sides.rhs).abs().max(-sides.inequality_slack));
    Ok(report.finish())
}

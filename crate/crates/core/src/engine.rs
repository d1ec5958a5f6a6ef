//! Dykstra's cyclic projections and the method of alternating projections,
//! run as pure folds that keep the complete history.
//!
//! Dykstra's scheme, for `n >= 1`:
//!
//! ```text
//! x_n = P_n(x_{n-1} + q_{n-m})
//! q_n = x_{n-1} + q_{n-m} - x_n
//! ```
//!
//! with `q_{-(m-1)} = ... = q_0 = 0` and `P_n` the projection onto
//! `C_{((n-1) mod m) + 1}`.

use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{EngineError, SetError};
use crate::sets::SetFamily;
use crate::vector::Vector;

/// Iteration state: the step counter, the current iterate and the last `m`
/// correction vectors `q_{n-m+1}, ..., q_n` (oldest first).
#[derive(Clone, Debug, PartialEq)]
pub struct DykstraState {
    n: usize,
    x: Vector,
    qbuf: VecDeque<Vector>,
}

impl DykstraState {
    /// The state at `n = 0`: all `m` buffered corrections are zero.
    pub fn initial(x0: Vector, m: usize) -> Self {
        let dim = x0.dim();
        DykstraState {
            n: 0,
            x: x0,
            qbuf: (0..m).map(|_| Vector::zeros(dim)).collect(),
        }
    }

    /// Builds a state from explicit parts. `qbuf` holds `q_{n-m+1}..q_n`.
    pub fn from_parts(n: usize, x: Vector, qbuf: Vec<Vector>) -> Result<Self, SetError> {
        if qbuf.is_empty() {
            return Err(SetError::invalid("correction buffer must be nonempty"));
        }
        for q in &qbuf {
            q.check_dim(x.dim())?;
        }
        Ok(DykstraState {
            n,
            x,
            qbuf: qbuf.into(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn x(&self) -> &Vector {
        &self.x
    }

    /// `q_n`, the most recent correction.
    pub fn latest_q(&self) -> &Vector {
        self.qbuf.back().expect("buffer has m >= 1 slots")
    }

    pub fn corrections(&self) -> impl Iterator<Item = &Vector> {
        self.qbuf.iter()
    }
}

/// One step of Dykstra's scheme, from state `n` to state `n + 1`.
pub fn dykstra_step(state: &DykstraState, family: &SetFamily) -> Result<DykstraState, SetError> {
    if state.qbuf.len() != family.len() {
        return Err(SetError::invalid(format!(
            "state buffers {} corrections but the family has {} sets",
            state.qbuf.len(),
            family.len()
        )));
    }
    state.x.check_dim(family.dim())?;
    let mut qbuf = state.qbuf.clone();
    let oldest = qbuf.pop_front().expect("m >= 1");
    let shifted = &state.x + &oldest;
    let x = family.set_for_step(state.n + 1).project_unchecked(&shifted);
    let q = &shifted - &x;
    qbuf.push_back(q);
    Ok(DykstraState {
        n: state.n + 1,
        x,
        qbuf,
    })
}

/// Order in which one MAP sweep applies the projections.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepOrder {
    /// `P_1 o P_2 o ... o P_m`: `P_m` is applied first.
    #[default]
    Composition,
    /// `P_m o ... o P_1`: the same cyclic order Dykstra's scheme visits.
    Cyclic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Dykstra,
    Map(SweepOrder),
}

/// Full history of a run: `x_0..x_T` and `q_{-(m-1)}..q_T`.
#[derive(Clone, Debug, PartialEq)]
pub struct Trace {
    method: Method,
    family: SetFamily,
    xs: Vec<Vector>,
    qs: Vec<Vector>,
}

impl Trace {
    /// Assembles a trace from recorded data (e.g. read back from disk).
    /// `qs` must hold `q_{-(m-1)}..q_T`, i.e. `T + m` vectors.
    pub fn from_parts(
        method: Method,
        family: SetFamily,
        xs: Vec<Vector>,
        qs: Vec<Vector>,
    ) -> Result<Self, SetError> {
        if xs.is_empty() {
            return Err(SetError::invalid("trace needs at least x_0"));
        }
        let expected = xs.len() - 1 + family.len();
        if qs.len() != expected {
            return Err(SetError::invalid(format!(
                "trace with {} steps needs {expected} corrections, got {}",
                xs.len() - 1,
                qs.len()
            )));
        }
        for v in xs.iter().chain(&qs) {
            v.check_dim(family.dim())?;
        }
        Ok(Trace {
            method,
            family,
            xs,
            qs,
        })
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn family(&self) -> &SetFamily {
        &self.family
    }

    /// Number of sets `m`.
    pub fn m(&self) -> usize {
        self.family.len()
    }

    /// Number of steps `T`.
    pub fn steps(&self) -> usize {
        self.xs.len() - 1
    }

    pub fn x0(&self) -> &Vector {
        &self.xs[0]
    }

    pub fn x(&self, n: usize) -> &Vector {
        &self.xs[n]
    }

    pub fn xs(&self) -> &[Vector] {
        &self.xs
    }

    /// `q_k` for `-(m-1) <= k <= T`.
    pub fn q(&self, k: i64) -> &Vector {
        let offset = self.m() as i64 - 1;
        let idx = k + offset;
        assert!(
            idx >= 0 && (idx as usize) < self.qs.len(),
            "q index {k} outside -(m-1)..=T"
        );
        &self.qs[idx as usize]
    }

    /// All stored corrections `q_{-(m-1)}..q_T`.
    pub fn qs(&self) -> &[Vector] {
        &self.qs
    }

    /// `x_k`, with `x_k := x_0` for negative `k` (those terms only ever
    /// meet zero corrections).
    pub fn x_ext(&self, k: i64) -> &Vector {
        if k <= 0 {
            &self.xs[0]
        } else {
            &self.xs[k as usize]
        }
    }

    pub fn last(&self) -> &Vector {
        self.xs.last().expect("nonempty")
    }

    pub fn all_q_zero(&self) -> bool {
        self.qs.iter().all(Vector::is_zero)
    }

    /// Replaces `q_k` (used to inject faults in tests of the checkers).
    pub fn perturb_q(&mut self, k: i64, delta: &Vector) {
        let offset = self.m() as i64 - 1;
        let idx = (k + offset) as usize;
        self.qs[idx] = &self.qs[idx] + delta;
    }
}

fn reserve(n: usize, what: &str) -> Result<Vec<Vector>, EngineError> {
    let mut v = Vec::new();
    v.try_reserve_exact(n).map_err(|e| {
        EngineError::Resource(format!("cannot allocate {n} {what} vectors: {e}"))
    })?;
    Ok(v)
}

/// Runs `steps` iterations of Dykstra's scheme from `x0`.
pub fn dykstra_run(family: &SetFamily, x0: &Vector, steps: usize) -> Result<Trace, EngineError> {
    x0.check_dim(family.dim())?;
    let m = family.len();
    let mut xs = reserve(steps + 1, "iterate")?;
    let mut qs = reserve(steps + m, "correction")?;
    let mut state = DykstraState::initial(x0.clone(), m);
    xs.push(x0.clone());
    qs.extend(state.qbuf.iter().cloned());
    for _ in 0..steps {
        state = dykstra_step(&state, family)?;
        xs.push(state.x.clone());
        qs.push(state.latest_q().clone());
    }
    Ok(Trace {
        method: Method::Dykstra,
        family: family.clone(),
        xs,
        qs,
    })
}

/// Runs `steps` sweeps of the method of alternating projections in the
/// default (composition) order.
pub fn map_run(family: &SetFamily, x0: &Vector, steps: usize) -> Result<Trace, EngineError> {
    map_run_with_order(family, x0, steps, SweepOrder::Composition)
}

/// MAP with an explicit sweep order; each step is one full sweep over the
/// `m` sets and all recorded corrections are zero.
pub fn map_run_with_order(
    family: &SetFamily,
    x0: &Vector,
    steps: usize,
    order: SweepOrder,
) -> Result<Trace, EngineError> {
    x0.check_dim(family.dim())?;
    let m = family.len();
    let mut xs = reserve(steps + 1, "iterate")?;
    let mut qs = reserve(steps + m, "correction")?;
    xs.push(x0.clone());
    let zero = Vector::zeros(family.dim());
    qs.extend((0..m).map(|_| zero.clone()));
    let mut x = x0.clone();
    for _ in 0..steps {
        x = match order {
            SweepOrder::Composition => family
                .sets()
                .iter()
                .rev()
                .fold(x, |acc, s| s.project_unchecked(&acc)),
            SweepOrder::Cyclic => family
                .sets()
                .iter()
                .fold(x, |acc, s| s.project_unchecked(&acc)),
        };
        xs.push(x.clone());
        qs.push(zero.clone());
    }
    Ok(Trace {
        method: Method::Map(order),
        family: family.clone(),
        xs,
        qs,
    })
}

/// Per-step derived quantities, one row per `n = 0..T-1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DerivedSeries {
    /// `|x_n - x_{n+1}|`
    pub step_norms: Vec<f64>,
    /// `residuals[n][j] = |x_n - P_{j+1}(x_n)|`
    pub residuals: Vec<Vec<f64>>,
    /// `s_n = sum_{k <= n} |x_k - x_{k+1}|`
    pub partial_sums: Vec<f64>,
    /// `sum_{k=n-m+1}^{n} |<x_k - x_n, q_k>|`
    pub window_sums: Vec<f64>,
}

impl DerivedSeries {
    pub fn len(&self) -> usize {
        self.step_norms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.step_norms.is_empty()
    }
}

/// `sum_{k=n-m+1}^{n} |<x_k - x_n, q_k>|`; corrections with `k <= 0` vanish.
pub fn window_sum(trace: &Trace, n: usize) -> f64 {
    let m = trace.m() as i64;
    let n_i = n as i64;
    let xn = trace.x(n);
    ((n_i - m + 1).max(1)..=n_i)
        .map(|k| (trace.x(k as usize) - xn).dot(trace.q(k)).abs())
        .sum()
}

pub fn series(trace: &Trace) -> DerivedSeries {
    let t = trace.steps();
    let mut out = DerivedSeries {
        step_norms: Vec::with_capacity(t),
        residuals: Vec::with_capacity(t),
        partial_sums: Vec::with_capacity(t),
        window_sums: Vec::with_capacity(t),
    };
    let mut running = 0.0;
    for n in 0..t {
        let step = trace.x(n).distance(trace.x(n + 1));
        running += step;
        out.step_norms.push(step);
        out.partial_sums.push(running);
        out.residuals.push(
            trace
                .family()
                .sets()
                .iter()
                .map(|s| trace.x(n).distance(&s.project_unchecked(trace.x(n))))
                .collect(),
        );
        out.window_sums.push(window_sum(trace, n));
    }
    out
}

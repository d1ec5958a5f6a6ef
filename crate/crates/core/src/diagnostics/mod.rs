//! Numerical certification of the iteration's identities and inequalities,
//! and least-witness searches for the quantitative convergence statements.

mod checks;
mod koh;
mod witness;

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::rates::RateBound;

pub use checks::{
    check_identities, check_inner_products, check_main_identity, check_membership,
    check_q_norm_bound, check_summability, main_identity_sides, MainIdentitySides,
};
pub use koh::{check_koh_lemmas, koh_interpolation_slack, koh_inner_product_slack, KohOutcome};
pub use witness::{
    check_asymptotic_regularity, find_liminf_witness, find_metastability_witness,
    finitization_replay, window_diameter, AsymptoticRegularityReport,
};

/// Identity residuals, relative to `1 + |x0|`.
pub const IDENTITY_TOLERANCE: f64 = 1e-10;
/// Inner-product sign conditions, relative to `1 + |x0|^2`.
pub const INNER_PRODUCT_TOLERANCE: f64 = 1e-9;
/// Lemma-level inequalities (norm bounds, sums), absolute slack.
pub const INEQUALITY_TOLERANCE: f64 = 1e-9;
/// The main identity, relative to `1 + |x0|^2 + |z|^2`.
pub const MAIN_IDENTITY_TOLERANCE: f64 = 1e-8;

/// Outcome of a numerical check against a named tolerance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub max_residual: f64,
    pub worst_index: Option<usize>,
    pub tolerance: f64,
    pub tolerance_name: String,
    pub pass: bool,
    pub params: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckReport {
    pub fn new(name: &str, tolerance_name: &str, tolerance: f64) -> Self {
        CheckReport {
            name: name.to_string(),
            max_residual: 0.0,
            worst_index: None,
            tolerance,
            tolerance_name: tolerance_name.to_string(),
            pass: true,
            params: BTreeMap::new(),
            note: None,
        }
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    /// Records a residual at `index`. The worst index is the first index over
    /// tolerance when the check fails, otherwise the argmax.
    pub fn observe(&mut self, index: usize, residual: f64) {
        let residual = if residual.is_nan() { f64::INFINITY } else { residual };
        let first_failure = residual > self.tolerance && self.pass;
        if first_failure {
            self.pass = false;
            self.worst_index = Some(index);
        } else if self.pass && (self.worst_index.is_none() || residual > self.max_residual) {
            self.worst_index = Some(index);
        }
        if residual > self.max_residual {
            self.max_residual = residual;
        }
    }

    pub fn finish(mut self) -> Self {
        self.pass = self.max_residual <= self.tolerance;
        self
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<28} {:<4} max={:.3e} {}={:.3e}",
            self.name,
            if self.pass { "PASS" } else { "FAIL" },
            self.max_residual,
            self.tolerance_name,
            self.tolerance
        )?;
        if let Some(i) = self.worst_index {
            write!(f, " at n={i}")?;
        }
        if let Some(note) = &self.note {
            write!(f, " ({note})")?;
        }
        Ok(())
    }
}

/// Result of a least-witness scan.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WitnessReport {
    pub name: String,
    pub eps: String,
    pub counterfunction: String,
    /// Least witness found in the scanned range.
    pub witness: Option<usize>,
    /// Lower end of the scan.
    pub start: usize,
    /// Last candidate examined.
    pub scanned_to: Option<usize>,
    pub bound: RateBound,
    /// `Some(true)` when the witness lies within the bound, `Some(false)` when
    /// the whole bound range was scanned without success, `None` when the
    /// bound is capped or reaches past the trace.
    pub bound_respected: Option<bool>,
    /// The scan stopped at the end of the trace before the bound.
    pub partial: bool,
    /// The window property was recomputed independently for the witness.
    pub verified: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl WitnessReport {
    /// A witness search fails only if the bound was checkable and violated,
    /// or a reported witness did not survive re-verification.
    pub fn failed(&self) -> bool {
        self.bound_respected == Some(false) || (self.witness.is_some() && !self.verified)
    }
}

impl fmt::Display for WitnessReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = match self.bound_respected {
            Some(true) => "PASS",
            Some(false) => "FAIL",
            None if self.witness.is_some() && self.verified => "FOUND",
            None => "OPEN",
        };
        write!(f, "{:<28} {:<5} eps={} f={}", self.name, status, self.eps, self.counterfunction)?;
        match self.witness {
            Some(n) => write!(f, " witness={n}")?,
            None => write!(f, " witness=none")?,
        }
        write!(f, " bound={}", self.bound)?;
        if let Some(note) = &self.note {
            write!(f, " ({note})")?;
        }
        Ok(())
    }
}

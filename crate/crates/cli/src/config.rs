//! Experiment configuration (JSON, versioned schema).
//!
//! Exact quantities (eps, b, rational thresholds) are strings such as
//! `"1/1000"` so no precision is lost on the way in.

use std::path::{Path, PathBuf};

use dykstra_core::exact::parse_nat;
use dykstra_core::rates::Caps;
use dykstra_core::{ExactNat, ExactPos, SetFamily, Vector};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// An exact positive rational written as a string.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Rational(pub ExactPos);

impl TryFrom<String> for Rational {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        s.parse::<ExactPos>().map(Rational).map_err(|e| e.to_string())
    }
}

impl From<Rational> for String {
    fn from(r: Rational) -> String {
        r.0.to_string()
    }
}

/// An exact natural written as a string (or a small JSON integer).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NatRepr", into = "String")]
pub struct Natural(pub ExactNat);

#[derive(Deserialize)]
#[serde(untagged)]
enum NatRepr {
    Int(u64),
    Text(String),
}

impl TryFrom<NatRepr> for Natural {
    type Error = String;
    fn try_from(r: NatRepr) -> Result<Self, String> {
        match r {
            NatRepr::Int(v) => Ok(Natural(ExactNat::from(v))),
            NatRepr::Text(s) => parse_nat(&s).map(Natural).map_err(|e| e.to_string()),
        }
    }
}

impl From<Natural> for String {
    fn from(n: Natural) -> String {
        n.0.to_string()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodChoice {
    #[default]
    Dykstra,
    /// Alternating projections, `P_1` applied last in each sweep.
    Map,
    /// Alternating projections in Dykstra's visiting order.
    MapCyclic,
}

fn default_samples() -> usize {
    100
}
fn default_triples() -> usize {
    50
}
fn default_trials() -> usize {
    1000
}
fn default_sweeps() -> usize {
    200
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CheckSpec {
    Identities {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tolerance: Option<f64>,
    },
    Membership {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tolerance: Option<f64>,
    },
    InnerProducts {
        #[serde(default = "default_samples")]
        samples: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tolerance: Option<f64>,
    },
    QNormBound {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tolerance: Option<f64>,
    },
    Summability {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tolerance: Option<f64>,
    },
    /// Seeded `(z, n, i)` triples with `z` drawn around the trace.
    MainIdentity {
        #[serde(default = "default_triples")]
        triples: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tolerance: Option<f64>,
    },
    Koh {
        eps: Rational,
        #[serde(default = "default_trials")]
        trials: usize,
    },
    /// Final iterate close to a known limit point.
    Target {
        point: Vector,
        tolerance: f64,
        /// Require the bound for every `n >= from` (default: only the last).
        #[serde(default, skip_serializing_if = "Option::is_none")]
        from: Option<usize>,
    },
    /// Dykstra sweep-end iterates against alternating projections.
    AffineReduction {
        #[serde(default = "default_sweeps")]
        sweeps: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tolerance: Option<f64>,
    },
    Finitization {
        eps: Rational,
        reference: Vector,
    },
    Liminf {
        eps: Rational,
        #[serde(default)]
        start: usize,
    },
    Metastability {
        eps: Rational,
        f: String,
    },
    AsymptoticRegularity {
        eps: Rational,
        f: String,
    },
}

/// A rate to evaluate; parameter names follow the CLI flags.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum RateQuery {
    Psi {
        #[serde(rename = "B")]
        bound: Rational,
        eps: Rational,
        f: String,
    },
    Phi {
        #[serde(rename = "B")]
        bound: Natural,
        m: u64,
        eps: Rational,
        #[serde(rename = "N")]
        n: Natural,
    },
    #[serde(alias = "Phi")]
    Liminf {
        b: Natural,
        m: u64,
        eps: Rational,
        #[serde(rename = "N")]
        n: Natural,
    },
    Alpha {
        b: Natural,
        m: u64,
        eps: Rational,
        f: String,
    },
    Beta {
        b: Natural,
        eps: Rational,
        delta: String,
    },
    Gamma {
        b: Natural,
        m: u64,
        eps: Rational,
        #[serde(rename = "Delta")]
        cap: String,
    },
    Omega {
        b: Natural,
        m: u64,
        eps: Rational,
        f: String,
    },
    Theta {
        b: Natural,
        m: u64,
        eps: Rational,
        modulus: String,
    },
    Kappa {
        b: Natural,
        n: u64,
        eps: Rational,
    },
    Modulus {
        modulus: String,
        r: Natural,
        eps: Rational,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Directory for artifacts, relative to the output root.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    #[serde(default = "yes")]
    pub trace: bool,
    #[serde(default = "yes")]
    pub series: bool,
}

fn yes() -> bool {
    true
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            dir: None,
            trace: true,
            series: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub name: String,
    pub family: SetFamily,
    pub x0: Vector,
    pub steps: usize,
    #[serde(default)]
    pub method: MethodChoice,
    /// Bound on `|x0 - p|`; derived as `ceil(|x0 - p|)` when a witness is
    /// given and this is omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Natural>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub checks: Vec<CheckSpec>,
    #[serde(default)]
    pub rates: Vec<RateQuery>,
    #[serde(default)]
    pub caps: Option<Caps>,
    #[serde(default)]
    pub output: OutputSpec,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| CliError::Config {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let invalid = |field: &str, msg: String| CliError::Invalid {
            field: field.into(),
            message: msg,
        };
        if self.version != SCHEMA_VERSION {
            return Err(invalid(
                "version",
                format!("unsupported schema version {}, expected {SCHEMA_VERSION}", self.version),
            ));
        }
        if self.x0.dim() != self.family.dim() {
            return Err(invalid(
                "x0",
                format!("dimension {} does not match the family's {}", self.x0.dim(), self.family.dim()),
            ));
        }
        if let (Some(b), Some(p)) = (&self.b, self.family.witness()) {
            let need = self.x0.distance(p);
            if (b.0.to_string().parse::<f64>().unwrap_or(f64::INFINITY)) < need {
                return Err(invalid("b", format!("b = {} is below |x0 - p| = {need:.6}", b.0)));
            }
        }
        Ok(())
    }

    /// `b` as configured, or `max(1, ceil(|x0 - p|))` from the witness.
    pub fn bound_b(&self) -> Option<ExactNat> {
        if let Some(b) = &self.b {
            return Some(b.0.clone());
        }
        let p = self.family.witness()?;
        let d = self.x0.distance(p);
        Some(ExactNat::from((d.ceil() as u64).max(1)))
    }

    pub fn caps(&self) -> Caps {
        self.caps.unwrap_or_default()
    }
}

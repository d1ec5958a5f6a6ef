//! Evaluation of rate queries, shared by `run` and `rates`.

use std::fmt;

use dykstra_core::exact::parse_nat;
use dykstra_core::rates::describe_nat;
use dykstra_core::regularity::{kappa_threshold, theta_parts, RateFunction, RegularityModulus, SemiAlgebraicParams};
use dykstra_core::{Calculus, Counterfunction, ExactNat, ExactPos, NatThreshold, RateError, ThresholdFunction};
use serde::Serialize;

use crate::config::RateQuery;
use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Outcome {
    Exact { value: String },
    Capped { reason: String },
    Error { message: String },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateResult {
    pub name: String,
    pub expression: String,
    #[serde(flatten)]
    pub outcome: Outcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl RateResult {
    pub fn is_error(&self) -> bool {
        matches!(self.outcome, Outcome::Error { .. })
    }
}

impl fmt::Display for RateResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.outcome {
            Outcome::Exact { value } => {
                if value.starts_with('~') {
                    write!(f, "≥ 10^30 (capped): {} = {value}", self.expression)?;
                } else {
                    write!(f, "{value}")?;
                }
            }
            Outcome::Capped { reason } => write!(f, "≥ 10^30 (capped): {} [{reason}]", self.expression)?,
            Outcome::Error { message } => write!(f, "error: {} [{message}]", self.expression)?,
        }
        if let Some(note) = &self.note {
            write!(f, "\nnote: {note}")?;
        }
        Ok(())
    }
}

fn from_nat(name: &str, expression: String, r: Result<ExactNat, RateError>) -> RateResult {
    finish(name, expression, r.map(|v| describe_nat(&v)))
}

fn from_pos(name: &str, expression: String, r: Result<ExactPos, RateError>) -> RateResult {
    finish(name, expression, r.map(|v| v.to_string()))
}

fn finish(name: &str, expression: String, r: Result<String, RateError>) -> RateResult {
    let outcome = match r {
        Ok(value) => Outcome::Exact { value },
        Err(e) if e.is_resource() => Outcome::Capped { reason: e.to_string() },
        Err(e) => Outcome::Error { message: e.to_string() },
    };
    RateResult {
        name: name.into(),
        expression,
        outcome,
        note: None,
    }
}

fn invalid(name: &str, expression: String, e: impl fmt::Display) -> RateResult {
    RateResult {
        name: name.into(),
        expression,
        outcome: Outcome::Error { message: e.to_string() },
        note: None,
    }
}

/// Parses a modulus name. `orthant` takes its `m` from `default_m` unless
/// written `orthant:M`.
pub fn parse_modulus(spec: &str, default_m: Option<u64>) -> Result<RegularityModulus, CliError> {
    let spec = spec.trim();
    let (kind, arg) = match spec.split_once(':') {
        Some((k, a)) => (k.trim(), Some(a.trim())),
        None => (spec, None),
    };
    let bad = |msg: &str| CliError::usage(format!("modulus `{spec}`: {msg}"));
    let num = |s: &str| s.trim().parse::<u64>().map_err(|_| bad(&format!("`{s}` is not a natural number")));
    match (kind, arg) {
        ("orthant", None) => default_m
            .map(|m| RegularityModulus::Orthant { m })
            .ok_or_else(|| bad("write orthant:M to give the number of half-spaces")),
        ("orthant", Some(m)) => Ok(RegularityModulus::Orthant { m: num(m)? }),
        ("constant", Some(v)) => Ok(RegularityModulus::UserSupplied {
            value: v.parse().map_err(|e: RateError| bad(&e.to_string()))?,
        }),
        ("from_rate", Some(f)) => Ok(RegularityModulus::FromRate {
            rho: RateFunction::new(Counterfunction::parse(f).map_err(|e| bad(&e.to_string()))?),
        }),
        ("semialgebraic", Some(args)) => {
            let parts: Vec<&str> = args.split(',').collect();
            if parts.len() != 4 {
                return Err(bad("expected semialgebraic:n,d,c,m"));
            }
            let c: ExactPos = parts[2].trim().parse().map_err(|e: RateError| bad(&e.to_string()))?;
            let p = SemiAlgebraicParams::new(num(parts[0])?, num(parts[1])?, c, num(parts[3])?)
                .map_err(|e| bad(&e.to_string()))?;
            Ok(RegularityModulus::SemiAlgebraic(p))
        }
        _ => Err(bad(
            "expected orthant[:M], constant:R, from_rate:EXPR or semialgebraic:n,d,c,m",
        )),
    }
}

fn modulus_note(mu: &RegularityModulus) -> Option<String> {
    let mut note = format!("modulus provenance: {}", mu.provenance());
    if let Some(n) = mu.note() {
        note.push_str(&format!(" ({n})"));
    }
    Some(note)
}

/// Evaluates one query. Resource exhaustion becomes a `capped` outcome and
/// never aborts the caller.
pub fn evaluate(q: &RateQuery, calc: &Calculus) -> RateResult {
    match q {
        RateQuery::Psi { bound, eps, f } => {
            let expr = format!("Psi(B={}, eps={}, f={f})", bound.0, eps.0);
            match Counterfunction::parse(f) {
                Ok(f) => from_nat("psi", expr, calc.psi(&bound.0, &eps.0, &f)),
                Err(e) => invalid("psi", expr, e),
            }
        }
        RateQuery::Phi { bound, m, eps, n } => {
            let expr = format!("phi(B={}, m={m}, eps={}, N={})", bound.0, eps.0, n.0);
            let mut r = from_nat("phi", expr, calc.phi(&bound.0, *m, &eps.0, &n.0));
            r.note = Some("certified upper bound: the exponential factor is rounded up from a verified enclosure".into());
            r
        }
        RateQuery::Liminf { b, m, eps, n } => {
            let expr = format!("Phi(b={}, m={m}, eps={}, N={})", b.0, eps.0, n.0);
            let mut r = from_nat("liminf", expr, calc.big_phi(&b.0, *m, &eps.0, &n.0));
            r.note = Some("certified upper bound: the exponential factor is rounded up from a verified enclosure".into());
            r
        }
        RateQuery::Alpha { b, m, eps, f } => {
            let expr = format!("alpha(b={}, m={m}, eps={}, f={f})", b.0, eps.0);
            match Counterfunction::parse(f) {
                Ok(f) => from_nat("alpha", expr, calc.alpha(&b.0, *m, &eps.0, &f)),
                Err(e) => invalid("alpha", expr, e),
            }
        }
        RateQuery::Beta { b, eps, delta } => {
            let expr = format!("beta(b={}, eps={}, delta={delta})", b.0, eps.0);
            match ThresholdFunction::parse(delta) {
                Ok(d) => from_pos("beta", expr, calc.beta(&b.0, &eps.0, &d)),
                Err(e) => invalid("beta", expr, e),
            }
        }
        RateQuery::Gamma { b, m, eps, cap } => {
            let expr = format!("gamma(b={}, m={m}, eps={}, Delta={cap})", b.0, eps.0);
            match NatThreshold::parse(cap) {
                Ok(d) => from_nat("gamma", expr, calc.gamma(&b.0, *m, &eps.0, &d)),
                Err(e) => invalid("gamma", expr, e),
            }
        }
        RateQuery::Omega { b, m, eps, f } => {
            let expr = format!("Omega(b={}, m={m}, eps={}, f={f})", b.0, eps.0);
            match Counterfunction::parse(f) {
                Ok(f) => from_nat("omega", expr, calc.omega(&b.0, *m, &eps.0, &f)),
                Err(e) => invalid("omega", expr, e),
            }
        }
        RateQuery::Theta { b, m, eps, modulus } => {
            let expr = format!("Theta(b={}, m={m}, eps={}, mu={modulus})", b.0, eps.0);
            match parse_modulus(modulus, Some(*m)) {
                Ok(mu) => {
                    let mut r = from_nat("theta", expr, theta_parts(&b.0, *m, &eps.0, &mu, calc).map(|p| p.theta));
                    r.note = modulus_note(&mu);
                    r
                }
                Err(e) => invalid("theta", expr, e),
            }
        }
        RateQuery::Kappa { b, n, eps } => {
            let expr = format!("kappa(b={}, n={n}, eps={})", b.0, eps.0);
            from_pos("kappa", expr, kappa_threshold(&b.0, *n, &eps.0))
        }
        RateQuery::Modulus { modulus, r, eps } => {
            let expr = format!("mu_{}({}) for {modulus}", r.0, eps.0);
            match parse_modulus(modulus, None) {
                Ok(mu) => {
                    let mut res = from_pos("modulus", expr, mu.eval(&r.0, &eps.0, calc));
                    res.note = modulus_note(&mu);
                    res
                }
                Err(e) => invalid("modulus", expr, e),
            }
        }
    }
}

/// Parses a natural written as a decimal string, for CLI flags.
pub fn nat_flag(name: &str, v: &Option<String>) -> Result<ExactNat, CliError> {
    let v = v.as_deref().ok_or_else(|| CliError::usage(format!("missing --{name}")))?;
    parse_nat(v).map_err(|e| CliError::usage(format!("--{name}: {e}")))
}

pub fn pos_flag(name: &str, v: &Option<String>) -> Result<ExactPos, CliError> {
    let v = v.as_deref().ok_or_else(|| CliError::usage(format!("missing --{name}")))?;
    v.parse().map_err(|e: RateError| CliError::usage(format!("--{name}: {e}")))
}

pub fn u64_flag(name: &str, v: Option<u64>) -> Result<u64, CliError> {
    v.ok_or_else(|| CliError::usage(format!("missing --{name}")))
}

pub fn str_flag<'a>(name: &str, v: &'a Option<String>) -> Result<&'a str, CliError> {
    v.as_deref().ok_or_else(|| CliError::usage(format!("missing --{name}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{Natural, Rational};
    use dykstra_core::rates::{nat, pos};

    fn q(v: serde_json::Value) -> RateQuery {
        serde_json::from_value(v).unwrap()
    }

    #[test]
    fn psi_and_phi_examples() {
        let calc = Calculus::default();
        let r = evaluate(&q(serde_json::json!({"name": "psi", "B": "1", "eps": "1/2", "f": "0"})), &calc);
        assert_eq!(r.outcome, Outcome::Exact { value: "2".into() });
        let r = evaluate(
            &RateQuery::Phi {
                bound: Natural(nat(1)),
                m: 2,
                eps: Rational(pos(3, 1)),
                n: Natural(nat(0)),
            },
            &calc,
        );
        assert_eq!(r.outcome, Outcome::Exact { value: "3".into() });
        assert!(r.note.is_some());
    }

    #[test]
    fn capped_is_not_an_error() {
        let calc = Calculus::default();
        let r = evaluate(&q(serde_json::json!({"name": "theta", "b": "1", "m": 2, "eps": "1", "modulus": "orthant"})), &calc);
        assert!(matches!(r.outcome, Outcome::Capped { .. }), "{r:?}");
        assert!(r.to_string().contains("capped"));
        assert_eq!(r.note.as_deref(), Some("modulus provenance: orthant-instance"));
    }

    #[test]
    fn modulus_names() {
        assert!(matches!(parse_modulus("orthant", Some(3)), Ok(RegularityModulus::Orthant { m: 3 })));
        assert!(parse_modulus("orthant", None).is_err());
        assert!(matches!(parse_modulus("constant:1/4", None), Ok(RegularityModulus::UserSupplied { .. })));
        assert!(matches!(parse_modulus("from_rate:n+1", None), Ok(RegularityModulus::FromRate { .. })));
        assert!(matches!(parse_modulus("semialgebraic:2,1,1,2", None), Ok(RegularityModulus::SemiAlgebraic(_))));
        assert!(parse_modulus("semialgebraic:2,1", None).is_err());
        assert!(parse_modulus("banana", None).is_err());
    }
}

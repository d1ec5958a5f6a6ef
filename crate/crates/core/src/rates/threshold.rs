//! Exact threshold functions: `(0, inf) -> (0, inf)` on positive rationals,
//! and `N -> (0, inf)`.

use std::fmt;

use num_traits::One;

use crate::error::RateError;
use crate::exact::{ExactNat, ExactPos};
use crate::expr::{self, Ast};

use super::counterfunction::Counterfunction;
use super::{Calculus, Caps};

/// The `delta` built inside `gamma`:
/// `eta -> min{ eps^2 / (8 b h(eta)), prefix_min Delta (h(eta)) }` with
/// `h(eta) = abar(eta) + Phi_eps(abar(eta))` and `abar(eta) = alpha(b, m, eta, Phi_eps)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GammaDelta {
    pub(crate) b: ExactNat,
    pub(crate) m: u64,
    pub(crate) eps: ExactPos,
    pub(crate) phi_eps: Counterfunction,
    pub(crate) cap: NatThreshold,
}

/// A function from positive rationals to positive rationals, kept as a
/// closed expression so iterates stay exact.
#[derive(Clone, Debug, PartialEq)]
pub enum ThresholdFunction {
    Const(ExactPos),
    /// `xi -> xi`
    Identity,
    Min(Box<ThresholdFunction>, Box<ThresholdFunction>),
    Mul(Box<ThresholdFunction>, Box<ThresholdFunction>),
    Add(Box<ThresholdFunction>, Box<ThresholdFunction>),
    Div(Box<ThresholdFunction>, Box<ThresholdFunction>),
    Gamma(Box<GammaDelta>),
}

impl ThresholdFunction {
    pub fn constant(q: ExactPos) -> Self {
        ThresholdFunction::Const(q)
    }

    /// Grammar: rational literals (`1/3`, `0.5`), `x` or `id` for the
    /// argument, `+`, `*`, `/`, `min(a,b)`.
    pub fn parse(src: &str) -> Result<Self, RateError> {
        Self::from_ast(&expr::parse(src)?, src).map(Self::fold_constants)
    }

    fn from_ast(ast: &Ast, src: &str) -> Result<Self, RateError> {
        let bad = |what: &str| RateError::Parse(format!("{what} in threshold {src:?}"));
        Ok(match ast {
            Ast::Num(q) => ThresholdFunction::Const(
                ExactPos::new(q.clone()).map_err(|_| bad("non-positive literal"))?,
            ),
            Ast::Ident(name) if name == "x" || name == "id" => ThresholdFunction::Identity,
            Ast::Ident(name) => return Err(bad(&format!("unknown variable {name:?}"))),
            Ast::Add(a, b) => ThresholdFunction::Add(
                Box::new(Self::from_ast(a, src)?),
                Box::new(Self::from_ast(b, src)?),
            ),
            Ast::Mul(a, b) => ThresholdFunction::Mul(
                Box::new(Self::from_ast(a, src)?),
                Box::new(Self::from_ast(b, src)?),
            ),
            Ast::Div(a, b) => ThresholdFunction::Div(
                Box::new(Self::from_ast(a, src)?),
                Box::new(Self::from_ast(b, src)?),
            ),
            Ast::Call(name, args) => match (name.as_str(), args.as_slice()) {
                ("min", [a, b]) => ThresholdFunction::Min(
                    Box::new(Self::from_ast(a, src)?),
                    Box::new(Self::from_ast(b, src)?),
                ),
                _ => return Err(bad(&format!("unknown function {name}/{}", args.len()))),
            },
        })
    }

    fn fold_constants(self) -> Self {
        use ThresholdFunction::*;
        let bin = |a: Box<Self>, b: Box<Self>| (a.fold_constants(), b.fold_constants());
        match self {
            Div(a, b) => match bin(a, b) {
                (Const(x), Const(y)) => Const(x.div(&y)),
                (x, y) => Div(Box::new(x), Box::new(y)),
            },
            Mul(a, b) => match bin(a, b) {
                (Const(x), Const(y)) => Const(x.mul(&y)),
                (x, y) => Mul(Box::new(x), Box::new(y)),
            },
            Add(a, b) => match bin(a, b) {
                (Const(x), Const(y)) => Const(x.add(&y)),
                (x, y) => Add(Box::new(x), Box::new(y)),
            },
            Min(a, b) => {
                let (x, y) = bin(a, b);
                Min(Box::new(x), Box::new(y))
            }
            other => other,
        }
    }

    pub fn eval(&self, xi: &ExactPos, calc: &Calculus) -> Result<ExactPos, RateError> {
        let v = match self {
            ThresholdFunction::Const(c) => c.clone(),
            ThresholdFunction::Identity => xi.clone(),
            ThresholdFunction::Min(a, b) => {
                let x = a.eval(xi, calc)?;
                let y = b.eval(xi, calc)?;
                x.min(y)
            }
            ThresholdFunction::Mul(a, b) => a.eval(xi, calc)?.mul(&b.eval(xi, calc)?),
            ThresholdFunction::Add(a, b) => a.eval(xi, calc)?.add(&b.eval(xi, calc)?),
            ThresholdFunction::Div(a, b) => a.eval(xi, calc)?.div(&b.eval(xi, calc)?),
            ThresholdFunction::Gamma(g) => g.eval(xi, calc)?,
        };
        calc.caps.check_bits("threshold value", v.bits())?;
        Ok(v)
    }
}

impl GammaDelta {
    /// `h(eta) = abar(eta) + Phi_eps(abar(eta))`
    pub(crate) fn horizon(&self, eta: &ExactPos, calc: &Calculus) -> Result<ExactNat, RateError> {
        let abar = calc
            .alpha(&self.b, self.m, eta, &self.phi_eps)
            .map_err(|e| e.within("alpha_bar"))?;
        let tail = self
            .phi_eps
            .eval(&abar, &calc.caps)
            .map_err(|e| e.within("Phi_eps"))?;
        Ok(abar + tail)
    }

    fn eval(&self, eta: &ExactPos, calc: &Calculus) -> Result<ExactPos, RateError> {
        let h = self.horizon(eta, calc).map_err(|e| e.within("delta"))?;
        // h >= Phi_eps(0) = E >= 1.
        let eight_b = ExactPos::from_nat(&(&self.b * 8u32))?;
        let first = self.eps.square().div(&eight_b).div_nat(&h)?;
        let second = self.cap.prefix_min(&h, &calc.caps).map_err(|e| e.within("delta"))?;
        Ok(first.min(second))
    }
}

/// A function `N -> (0, inf)`.
#[derive(Clone, Debug, PartialEq)]
pub enum NatThreshold {
    Const(ExactPos),
    /// `k -> numer / max{f(k), 1}`
    Ratio { numer: ExactPos, f: Counterfunction },
}

impl NatThreshold {
    /// Grammar: a rational literal, or `ratio(c, f)` with `f` a
    /// counterfunction in `n`.
    pub fn parse(src: &str) -> Result<Self, RateError> {
        let t = src.trim();
        if let Some(body) = t.strip_prefix("ratio(").and_then(|r| r.strip_suffix(')')) {
            let (c, f) = body
                .split_once(',')
                .ok_or_else(|| RateError::Parse(format!("ratio(c, f) expected in {src:?}")))?;
            let numer = match ThresholdFunction::parse(c)? {
                ThresholdFunction::Const(q) => q,
                _ => {
                    return Err(RateError::Parse(format!(
                        "ratio numerator must be a constant in {src:?}"
                    )))
                }
            };
            return Ok(NatThreshold::Ratio {
                numer,
                f: Counterfunction::parse(f)?,
            });
        }
        match ThresholdFunction::parse(t)? {
            ThresholdFunction::Const(q) => Ok(NatThreshold::Const(q)),
            _ => Err(RateError::Parse(format!(
                "expected a positive constant or ratio(c, f), got {src:?}"
            ))),
        }
    }

    pub fn eval(&self, k: &ExactNat, caps: &Caps) -> Result<ExactPos, RateError> {
        match self {
            NatThreshold::Const(c) => Ok(c.clone()),
            NatThreshold::Ratio { numer, f } => {
                let d = f.eval(k, caps)?.max(ExactNat::one());
                numer.div_nat(&d)
            }
        }
    }

    /// `min{ self(k') : k' <= k }`. Counterfunctions are monotone, so both
    /// variants are antitone and the minimum is attained at `k`.
    pub fn prefix_min(&self, k: &ExactNat, caps: &Caps) -> Result<ExactPos, RateError> {
        self.eval(k, caps)
    }
}

impl fmt::Display for ThresholdFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ThresholdFunction::Const(c) => write!(f, "{c}"),
            ThresholdFunction::Identity => write!(f, "x"),
            ThresholdFunction::Min(a, b) => write!(f, "min({a},{b})"),
            ThresholdFunction::Mul(a, b) => write!(f, "({a})*({b})"),
            ThresholdFunction::Add(a, b) => write!(f, "({a})+({b})"),
            ThresholdFunction::Div(a, b) => write!(f, "({a})/({b})"),
            ThresholdFunction::Gamma(g) => write!(
                f,
                "delta_gamma(b={},m={},eps={},Delta={})",
                g.b, g.m, g.eps, g.cap
            ),
        }
    }
}

impl fmt::Display for NatThreshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NatThreshold::Const(c) => write!(f, "{c}"),
            NatThreshold::Ratio { numer, f: g } => write!(f, "ratio({numer},{g})"),
        }
    }
}

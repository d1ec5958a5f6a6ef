//! Exact rate functions: Psi, phi, Phi, alpha, beta, gamma and Omega.
//!
//! Every value is an exact natural or positive rational. The only
//! over-approximation is the integer factor `E = ceil(e^y)` in `phi`, which
//! is at most one above `floor(e^y)`.

pub mod counterfunction;
pub mod threshold;

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::RateError;
use crate::exact::{approx_decimal_digits, decimal_if_small, ExactNat, ExactPos};
use crate::expbound::ceil_exp;

pub use counterfunction::{Counterfunction, LiminfRate};
pub use threshold::{GammaDelta, NatThreshold, ThresholdFunction};

/// Resource caps for exact rate evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Caps {
    pub max_iterations: u64,
    pub max_bits: u64,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            max_iterations: 1_000_000,
            max_bits: 1 << 20,
        }
    }
}

impl Caps {
    pub(crate) fn check_bits(&self, formula: &str, bits: u64) -> Result<(), RateError> {
        if bits > self.max_bits {
            Err(RateError::resource(
                formula,
                format!("value needs {bits} bits (cap {})", self.max_bits),
            ))
        } else {
            Ok(())
        }
    }

    pub(crate) fn check_iterations(&self, formula: &str, count: &ExactNat) -> Result<u64, RateError> {
        match count.to_u64() {
            Some(c) if c <= self.max_iterations => Ok(c),
            _ => Err(RateError::resource(
                formula,
                format!(
                    "{} iterations required (cap {})",
                    describe_nat(count),
                    self.max_iterations
                ),
            )),
        }
    }
}

/// Decimal text up to `10^30`, otherwise an order-of-magnitude note.
pub fn describe_nat(n: &ExactNat) -> String {
    decimal_if_small(n).unwrap_or_else(|| format!("~10^{}", approx_decimal_digits(n)))
}

fn check_m(m: u64) -> Result<(), RateError> {
    if m < 2 {
        Err(RateError::invalid(format!("m must be at least 2, got {m}")))
    } else {
        Ok(())
    }
}

fn check_unit_eps(eps: &ExactPos) -> Result<(), RateError> {
    if *eps > ExactPos::one() {
        Err(RateError::invalid(format!("eps must lie in (0, 1], got {eps}")))
    } else {
        Ok(())
    }
}

fn nat_rational(n: &ExactNat) -> BigRational {
    BigRational::from_integer(BigInt::from(n.clone()))
}

/// Rate evaluator carrying the resource caps.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Calculus {
    pub caps: Caps,
}

impl Calculus {
    pub fn new(caps: Caps) -> Self {
        Calculus { caps }
    }

    /// `Psi(B, eps, f) = fcheck^(R)(0)` with `fcheck(p) = p + f(p) + 1` and
    /// `R = floor(B / eps)`.
    pub fn psi(&self, bound: &ExactPos, eps: &ExactPos, f: &Counterfunction) -> Result<ExactNat, RateError> {
        self.psi_rational(bound.as_rational(), eps, f)
    }

    pub(crate) fn psi_rational(
        &self,
        bound: &BigRational,
        eps: &ExactPos,
        f: &Counterfunction,
    ) -> Result<ExactNat, RateError> {
        let ratio = bound / eps.as_rational();
        let r = ratio.floor().to_integer();
        let r = r.to_biguint().unwrap_or_default();
        let steps = self.caps.check_iterations("Psi", &r)?;
        let mut p = ExactNat::zero();
        for _ in 0..steps {
            let fp = f.eval(&p, &self.caps).map_err(|e| e.within("Psi"))?;
            p = &p + fp + 1u32;
            self.caps.check_bits("Psi", p.bits())?;
        }
        Ok(p)
    }

    /// The certified factor `E = ceil(e^{((m+1) B / eps)^2})`.
    pub fn phi_factor(&self, bound: &ExactNat, m: u64, eps: &ExactPos) -> Result<ExactNat, RateError> {
        check_m(m)?;
        let base = nat_rational(bound) * BigRational::from_integer(BigInt::from(m + 1))
            / eps.as_rational();
        let y = &base * &base;
        ceil_exp(&y, self.caps.max_bits).map_err(|e| e.within("phi"))
    }

    /// `phi_B(m, eps, N) = E * (N + 1)`.
    pub fn phi(&self, bound: &ExactNat, m: u64, eps: &ExactPos, n: &ExactNat) -> Result<ExactNat, RateError> {
        let e = self.phi_factor(bound, m, eps)?;
        Ok(e * (n + 1u32))
    }

    /// `Phi(b, m, eps, N) = phi_{b^2}(m, eps, N)`.
    pub fn big_phi(&self, b: &ExactNat, m: u64, eps: &ExactPos, n: &ExactNat) -> Result<ExactNat, RateError> {
        self.phi(&(b * b), m, eps, n).map_err(|e| e.within("Phi"))
    }

    /// `N -> Phi(b, m, eps, N)` as a counterfunction.
    pub fn liminf_rate(&self, b: &ExactNat, m: u64, eps: &ExactPos) -> Result<Counterfunction, RateError> {
        let factor = self.phi_factor(&(b * b), m, eps).map_err(|e| e.within("Phi"))?;
        Ok(Counterfunction::Liminf(LiminfRate {
            b: b.clone(),
            m,
            eps: eps.clone(),
            factor,
        }))
    }

    /// `alpha(b, m, eps, f) = Psi(b^2, (eps/(m-1))^2, f + m - 2)`.
    pub fn alpha(&self, b: &ExactNat, m: u64, eps: &ExactPos, f: &Counterfunction) -> Result<ExactNat, RateError> {
        check_m(m)?;
        let scaled = eps.div_nat(&ExactNat::from(m - 1))?.square();
        let shifted = f.clone().shifted(m - 2);
        self.psi_rational(&nat_rational(&(b * b)), &scaled, &shifted)
            .map_err(|e| e.within("alpha"))
    }

    /// `beta(b, eps, delta) = phi^2 / (24 b)` with
    /// `phi = min_{0 <= i <= ceil(4 b^4 / eps^2)} dtilde^(i)(1)` and
    /// `dtilde(xi) = min{ delta(xi^2 / 24b), xi^2 / 24b }`.
    pub fn beta(&self, b: &ExactNat, eps: &ExactPos, delta: &ThresholdFunction) -> Result<ExactPos, RateError> {
        if b.is_zero() {
            return Err(RateError::invalid("b must be at least 1"));
        }
        let b4 = ExactPos::from_nat(&b.pow(4u32))?;
        let count = b4.mul_nat(&ExactNat::from(4u32))?.div(&eps.square()).ceil();
        let count = self.caps.check_iterations("beta", &count)?;
        let denom = ExactNat::from(24u32) * b;
        let mut xi = ExactPos::one();
        let mut best = xi.clone();
        for _ in 0..count {
            let shrunk = xi.square().div_nat(&denom)?;
            self.caps.check_bits("beta", shrunk.bits())?;
            let d = delta.eval(&shrunk, self).map_err(|e| e.within("beta"))?;
            xi = d.min(shrunk);
            if xi < best {
                best = xi.clone();
            }
        }
        best.square().div_nat(&denom)
    }

    /// `gamma(b, m, eps, Delta) = abar(bbar) + Phi_eps(abar(bbar))`.
    pub fn gamma(&self, b: &ExactNat, m: u64, eps: &ExactPos, cap: &NatThreshold) -> Result<ExactNat, RateError> {
        check_m(m)?;
        check_unit_eps(eps)?;
        if b.is_zero() {
            return Err(RateError::invalid("b must be at least 1"));
        }
        let quarter = eps.square().div_nat(&ExactNat::from(4u32))?;
        let phi_eps = self
            .liminf_rate(b, m, &quarter)
            .map_err(|e| e.within("gamma > Phi_eps"))?;
        let inner = GammaDelta {
            b: b.clone(),
            m,
            eps: eps.clone(),
            phi_eps,
            cap: cap.clone(),
        };
        let half = eps.square().div_nat(&ExactNat::from(2u32))?;
        let delta = ThresholdFunction::Gamma(Box::new(inner.clone()));
        let bbar = self
            .beta(b, &half, &delta)
            .map_err(|e| e.within("gamma > beta_bar"))?;
        inner.horizon(&bbar, self).map_err(|e| e.within("gamma"))
    }

    /// `Omega(b, m, eps, f) = gamma(b, m, eps^2/(96 b), Delta_{eps,f})` with
    /// `Delta_{eps,f}(k) = eps^2 / (48 b max{k + f(k), 1})`.
    pub fn omega(&self, b: &ExactNat, m: u64, eps: &ExactPos, f: &Counterfunction) -> Result<ExactNat, RateError> {
        check_unit_eps(eps)?;
        if b.is_zero() {
            return Err(RateError::invalid("b must be at least 1"));
        }
        let eps_tilde = eps.square().div_nat(&(ExactNat::from(96u32) * b))?;
        let cap = NatThreshold::Ratio {
            numer: eps.square().div_nat(&(ExactNat::from(48u32) * b))?,
            f: Counterfunction::identity().plus(f.clone()),
        };
        self.gamma(b, m, &eps_tilde, &cap).map_err(|e| e.within("Omega"))
    }
}

pub fn rate_psi(bound: &ExactPos, eps: &ExactPos, f: &Counterfunction) -> Result<ExactNat, RateError> {
    Calculus::default().psi(bound, eps, f)
}

pub fn rate_phi(bound: &ExactNat, m: u64, eps: &ExactPos, n: &ExactNat) -> Result<ExactNat, RateError> {
    Calculus::default().phi(bound, m, eps, n)
}

#[allow(non_snake_case)]
pub fn rate_Phi(b: &ExactNat, m: u64, eps: &ExactPos, n: &ExactNat) -> Result<ExactNat, RateError> {
    Calculus::default().big_phi(b, m, eps, n)
}

pub fn rate_alpha(b: &ExactNat, m: u64, eps: &ExactPos, f: &Counterfunction) -> Result<ExactNat, RateError> {
    Calculus::default().alpha(b, m, eps, f)
}

pub fn rate_beta(b: &ExactNat, eps: &ExactPos, delta: &ThresholdFunction) -> Result<ExactPos, RateError> {
    Calculus::default().beta(b, eps, delta)
}

pub fn rate_gamma(b: &ExactNat, m: u64, eps: &ExactPos, cap: &NatThreshold) -> Result<ExactNat, RateError> {
    Calculus::default().gamma(b, m, eps, cap)
}

#[allow(non_snake_case)]
pub fn rate_Omega(b: &ExactNat, m: u64, eps: &ExactPos, f: &Counterfunction) -> Result<ExactNat, RateError> {
    Calculus::default().omega(b, m, eps, f)
}

/// A rate that was either computed exactly or hit a resource cap.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RateBound {
    Exact {
        #[serde(serialize_with = "ser_nat")]
        value: ExactNat,
    },
    Capped { expression: String, reason: String },
}

fn ser_nat<S: serde::Serializer>(n: &ExactNat, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(&describe_nat(n))
}

impl RateBound {
    pub fn from_result(expression: impl Into<String>, r: Result<ExactNat, RateError>) -> Self {
        match r {
            Ok(value) => RateBound::Exact { value },
            Err(e) => RateBound::Capped {
                expression: expression.into(),
                reason: e.to_string(),
            },
        }
    }

    pub fn exact(&self) -> Option<&ExactNat> {
        match self {
            RateBound::Exact { value } => Some(value),
            RateBound::Capped { .. } => None,
        }
    }

    /// The value as a `u64` when it is exact and at most `limit`.
    pub fn at_most(&self, limit: u64) -> Option<u64> {
        self.exact()?.to_u64().filter(|v| *v <= limit)
    }

    pub fn is_capped(&self) -> bool {
        matches!(self, RateBound::Capped { .. })
    }

    /// The same bound plus one (for over-approximation checks).
    pub fn incremented(&self) -> RateBound {
        match self {
            RateBound::Exact { value } => RateBound::Exact {
                value: value + 1u32,
            },
            capped => capped.clone(),
        }
    }
}

impl fmt::Display for RateBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RateBound::Exact { value } => match decimal_if_small(value) {
                Some(s) => write!(f, "{s}"),
                None => write!(f, "≥ 10^30 (capped): {} digits", approx_decimal_digits(value)),
            },
            RateBound::Capped { expression, reason } => {
                write!(f, "≥ 10^30 (capped): {expression} [{reason}]")
            }
        }
    }
}

impl From<ExactNat> for RateBound {
    fn from(value: ExactNat) -> Self {
        RateBound::Exact { value }
    }
}

/// `ExactNat` shorthand.
pub fn nat(n: u64) -> ExactNat {
    ExactNat::from(n)
}

/// Positive rational shorthand; panics on a zero denominator or numerator.
pub fn pos(numer: u64, denom: u64) -> ExactPos {
    ExactPos::from_ratio(numer, denom).expect("positive rational")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cf(s: &str) -> Counterfunction {
        Counterfunction::parse(s).unwrap()
    }

    #[test]
    fn psi_examples() {
        assert_eq!(rate_psi(&pos(1, 1), &pos(1, 2), &cf("0")).unwrap(), nat(2));
        assert_eq!(rate_psi(&pos(1, 10), &pos(1, 2), &cf("n*n+7")).unwrap(), nat(0));
        assert_eq!(rate_psi(&pos(1, 1), &pos(2, 5), &cf("n")).unwrap(), nat(3));
    }

    #[test]
    fn psi_iteration_cap() {
        let err = rate_psi(&pos(1, 1), &pos(1, 10_000_000), &cf("0")).unwrap_err();
        assert!(err.is_resource());
        assert!(err.to_string().contains("Psi"));
    }

    #[test]
    fn phi_examples() {
        assert_eq!(rate_phi(&nat(1), 2, &pos(3, 1), &nat(0)).unwrap(), nat(3));
        assert_eq!(rate_phi(&nat(1), 2, &pos(6, 1), &nat(4)).unwrap(), nat(10));
        let base = rate_phi(&nat(3), 3, &pos(7, 2), &nat(0)).unwrap();
        assert_eq!(rate_phi(&nat(3), 3, &pos(7, 2), &nat(9)).unwrap(), base * 10u32);
        assert!(rate_phi(&nat(1), 1, &pos(1, 1), &nat(0)).is_err());
    }

    #[test]
    fn big_phi_examples() {
        assert_eq!(
            rate_Phi(&nat(1), 2, &pos(3, 1), &nat(5)).unwrap(),
            rate_phi(&nat(1), 2, &pos(3, 1), &nat(5)).unwrap()
        );
        assert_eq!(rate_Phi(&nat(2), 2, &pos(12, 1), &nat(0)).unwrap(), nat(3));
    }

    #[test]
    fn phi_cap_names_formula() {
        let err = rate_Phi(&nat(2), 2, &pos(1, 100), &nat(0)).unwrap_err();
        match err {
            RateError::Resource { formula, .. } => assert_eq!(formula, "Phi > phi > exp"),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn alpha_examples() {
        assert_eq!(rate_alpha(&nat(1), 2, &pos(1, 1), &cf("0")).unwrap(), nat(1));
        let f = cf("n+1");
        assert_eq!(
            rate_alpha(&nat(2), 2, &pos(1, 3), &f).unwrap(),
            rate_psi(&pos(4, 1), &pos(1, 9), &f).unwrap()
        );
        // m = 4: Psi(b^2, (eps/3)^2, f + 2)
        assert_eq!(
            rate_alpha(&nat(1), 4, &pos(3, 1), &cf("0")).unwrap(),
            rate_psi(&pos(1, 1), &pos(1, 1), &cf("2")).unwrap()
        );
    }

    #[test]
    fn beta_examples() {
        let id = ThresholdFunction::Identity;
        assert_eq!(rate_beta(&nat(1), &pos(2, 1), &id).unwrap(), pos(1, 13824));
        let one = ThresholdFunction::Const(pos(1, 1));
        assert_eq!(rate_beta(&nat(1), &pos(2, 1), &one).unwrap(), pos(1, 13824));
        assert!(rate_beta(&nat(2), &pos(2, 1), &id).unwrap() < rate_beta(&nat(1), &pos(2, 1), &id).unwrap());
    }

    #[test]
    fn gamma_is_capped_with_formula_path() {
        let err = rate_gamma(&nat(1), 2, &pos(1, 1), &NatThreshold::Const(pos(1, 1))).unwrap_err();
        match err {
            RateError::Resource { formula, .. } => {
                assert!(formula.starts_with("gamma > beta_bar"), "{formula}")
            }
            other => panic!("unexpected {other}"),
        }
        assert!(rate_gamma(&nat(1), 2, &pos(2, 1), &NatThreshold::Const(pos(1, 1))).is_err());
    }

    #[test]
    fn omega_is_capped() {
        let err = rate_Omega(&nat(2), 2, &pos(1, 2), &cf("1")).unwrap_err();
        assert!(err.is_resource());
        assert!(err.to_string().contains("Omega > gamma"));
    }

    #[test]
    fn rate_bound_display() {
        assert_eq!(RateBound::from(nat(42)).to_string(), "42");
        let big = RateBound::from(crate::exact::display_limit() * 10u32);
        assert!(big.to_string().starts_with("≥ 10^30 (capped)"));
        assert_eq!(RateBound::from(nat(4)).incremented().at_most(10), Some(5));
    }
}

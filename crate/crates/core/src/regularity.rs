//! Moduli of regularity, the regularity-based rate Theta, and the
//! residual thresholds that bound how far a short run can travel.
//!
//! A modulus `mu_r(eps)` promises: every point of the closed ball of radius
//! `r` around the witness whose distance to each set is at most `mu_r(eps)`
//! lies within `eps` of the intersection.

use std::fmt;

use num_bigint::BigUint;
use num_integer::Roots;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::RateError;
use crate::exact::{ExactNat, ExactPos};
use crate::rates::{Calculus, Counterfunction};

/// Parameters of the Hölder-type modulus for basic semi-algebraic sets.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SemiAlgebraicParams {
    /// Ambient dimension.
    pub n: u64,
    /// Largest degree of the defining polynomials.
    pub d: u64,
    /// Hölder constant; existential, so always user-supplied.
    pub c: ExactPos,
    /// Number of sets.
    pub m: u64,
    /// Number of defining polynomials. Accepted but not used by the formula.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub polynomials: Option<u64>,
}

impl SemiAlgebraicParams {
    pub fn new(n: u64, d: u64, c: ExactPos, m: u64) -> Result<Self, RateError> {
        if n == 0 || d == 0 || m == 0 {
            return Err(RateError::invalid("n, d and m must be at least 1"));
        }
        Ok(SemiAlgebraicParams {
            n,
            d,
            c,
            m,
            polynomials: None,
        })
    }
}

/// Central binomial coefficient `C(k, floor(k/2))`.
pub fn central_binomial(k: u64) -> ExactNat {
    let half = k / 2;
    let mut acc = BigUint::one();
    for i in 0..half {
        acc = acc * (k - i) / (i + 1);
    }
    acc
}

/// `sigma = min{ ((2d-1)^n + 1) / 2, B(n-1) d^n }`. Always an integer since
/// `(2d-1)^n` is odd.
pub fn semialgebraic_exponent(n: u64, d: u64) -> ExactNat {
    let exp = u32::try_from(n).expect("dimension fits u32");
    let first = (BigUint::from(2 * d - 1).pow(exp) + 1u32) / 2u32;
    let second = central_binomial(n - 1) * BigUint::from(d).pow(exp);
    first.min(second)
}

/// `mu_r(eps) = (eps / c)^sigma / m`, exactly.
///
/// `r` does not enter: the supplied `c` is understood to be valid on the
/// ball of radius `r`.
pub fn modulus_semialgebraic(
    params: &SemiAlgebraicParams,
    _r: &ExactNat,
    eps: &ExactPos,
    calc: &Calculus,
) -> Result<ExactPos, RateError> {
    let sigma = semialgebraic_exponent(params.n, params.d);
    let base = eps.div(&params.c);
    let estimate = base.bits() as f64 * sigma.to_f64().unwrap_or(f64::INFINITY);
    let sigma = match sigma.to_u32() {
        Some(s) if estimate <= calc.caps.max_bits as f64 => s,
        _ => {
            return Err(RateError::resource(
                "mu_semialgebraic",
                format!("(eps/c)^sigma with sigma = {sigma} exceeds the bit cap"),
            ))
        }
    };
    base.pow(sigma).div_nat(&ExactNat::from(params.m))
}

/// A rational lower bound of `eps / sqrt(m)`, exact when `m` is a square.
pub fn modulus_orthant(m: u64, eps: &ExactPos) -> Result<ExactPos, RateError> {
    if m < 2 {
        return Err(RateError::invalid(format!("m must be at least 2, got {m}")));
    }
    let root = m.sqrt();
    if root * root == m {
        return eps.div_nat(&ExactNat::from(root));
    }
    // sqrt(m) <= u / 2^K with u = ceil(sqrt(m * 4^K)).
    const K: usize = 64;
    let scaled = BigUint::from(m) << (2 * K);
    let mut u = scaled.sqrt();
    if &u * &u < scaled {
        u += 1u32;
    }
    eps.mul_nat(&(BigUint::one() << K))?.div_nat(&u)
}

/// `max{ eps^2 / (4 b n), eps / 5^(n-1) }`: if every initial residual is
/// below this, the first `n` iterates stay within `eps` of `x0`.
pub fn kappa_threshold(b: &ExactNat, n: u64, eps: &ExactPos) -> Result<ExactPos, RateError> {
    if n == 0 || b.is_zero() {
        return Err(RateError::invalid("n and b must be at least 1"));
    }
    let denom = b * 4u32 * n;
    let first = eps.square().div_nat(&denom)?;
    // Skip the geometric branch when 5^(n-1) > 4bn/eps is certain.
    let ratio_bits = (&denom * eps.denom()).bits() as f64 - eps.numer().bits() as f64 + 2.0;
    if (n - 1) as f64 * 5f64.log2() > ratio_bits + 8.0 {
        return Ok(first);
    }
    let pow = BigUint::from(5u32).pow(u32::try_from(n - 1).expect("checked above"));
    let second = eps.div_nat(&pow)?;
    Ok(first.max(second))
}

/// A convergence rate `rho(b, eps) = f(ceil(b / eps))`, `f` a
/// counterfunction.
#[derive(Clone, Debug, PartialEq)]
pub struct RateFunction {
    pub f: Counterfunction,
}

impl RateFunction {
    pub fn new(f: Counterfunction) -> Self {
        RateFunction { f }
    }

    pub fn eval(&self, b: &ExactNat, eps: &ExactPos, calc: &Calculus) -> Result<ExactNat, RateError> {
        let arg = ExactPos::from_nat(b)?.div(eps).ceil();
        self.f.eval(&arg, &calc.caps)
    }
}

impl fmt::Display for RateFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rho(b,eps) = [{}](ceil(b/eps))", self.f)
    }
}

/// Result of converting a rate into a modulus.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModulusFromRate {
    pub value: ExactPos,
    /// The geometric branch `eps / (2 * 5^rho)` was too large to build and
    /// only the first branch was used.
    pub truncated: bool,
}

/// `max{ eps^2 / (16 b rho(b, eps/2)), eps / (2 * 5^rho(b, eps/2)) }`.
pub fn modulus_from_rate(
    b: &ExactNat,
    eps: &ExactPos,
    rho: &RateFunction,
    calc: &Calculus,
) -> Result<ModulusFromRate, RateError> {
    if b.is_zero() {
        return Err(RateError::invalid("b must be at least 1"));
    }
    let half = eps.div_nat(&ExactNat::from(2u32))?;
    let r = rho.eval(b, &half, calc).map_err(|e| e.within("rho"))?;
    if r.is_zero() {
        return Err(RateError::invalid("rho(b, eps/2) must be at least 1"));
    }
    let first = eps.square().div_nat(&(b * 16u32 * &r))?;
    let fits = r
        .to_u32()
        .filter(|v| (*v as f64) * 5f64.log2() <= calc.caps.max_bits as f64);
    match fits {
        Some(v) => {
            let second = eps.div_nat(&(BigUint::from(5u32).pow(v) * 2u32))?;
            Ok(ModulusFromRate {
                value: first.max(second),
                truncated: false,
            })
        }
        None => Ok(ModulusFromRate {
            value: first,
            truncated: true,
        }),
    }
}

/// A modulus of regularity together with where it comes from.
#[derive(Clone, Debug, PartialEq)]
pub enum RegularityModulus {
    /// `eps / sqrt(m)` for the axis half-spaces `{x_j <= 0}` in `R^m`.
    Orthant { m: u64 },
    SemiAlgebraic(SemiAlgebraicParams),
    /// Built from a convergence rate, evaluated at `b = r`.
    FromRate { rho: RateFunction },
    /// A fixed value, independent of `r` and `eps`.
    UserSupplied { value: ExactPos },
    /// The same sets with the witness moved: evaluates `inner` at `r + shift`.
    Recentred {
        inner: Box<RegularityModulus>,
        shift: ExactNat,
    },
}

impl RegularityModulus {
    /// Re-centres at another witness `q`: `shift = ceil(|p - q|)`.
    pub fn recentred(self, distance: f64) -> Self {
        let shift = ExactNat::from(distance.max(0.0).ceil() as u64);
        RegularityModulus::Recentred {
            inner: Box::new(self),
            shift,
        }
    }

    pub fn provenance(&self) -> &'static str {
        match self {
            RegularityModulus::Orthant { .. } => "orthant-instance",
            RegularityModulus::SemiAlgebraic(_) => "semi-algebraic",
            RegularityModulus::FromRate { .. } => "from-rate",
            RegularityModulus::UserSupplied { .. } => "user-supplied",
            RegularityModulus::Recentred { inner, .. } => inner.provenance(),
        }
    }

    /// Caveat attached to reports, if any.
    pub fn note(&self) -> Option<&'static str> {
        match self {
            RegularityModulus::SemiAlgebraic(_) => Some("conditional on supplied c"),
            RegularityModulus::UserSupplied { .. } => Some("validity is the caller's claim"),
            RegularityModulus::Recentred { inner, .. } => inner.note(),
            _ => None,
        }
    }

    pub fn eval(&self, r: &ExactNat, eps: &ExactPos, calc: &Calculus) -> Result<ExactPos, RateError> {
        match self {
            RegularityModulus::Orthant { m } => modulus_orthant(*m, eps),
            RegularityModulus::SemiAlgebraic(p) => modulus_semialgebraic(p, r, eps, calc),
            RegularityModulus::FromRate { rho } => Ok(modulus_from_rate(r, eps, rho, calc)?.value),
            RegularityModulus::UserSupplied { value } => Ok(value.clone()),
            RegularityModulus::Recentred { inner, shift } => inner.eval(&(r + shift), eps, calc),
        }
    }
}

impl fmt::Display for RegularityModulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegularityModulus::Orthant { m } => write!(f, "orthant(m={m})"),
            RegularityModulus::SemiAlgebraic(p) => {
                write!(f, "semialgebraic(n={},d={},c={},m={})", p.n, p.d, p.c, p.m)
            }
            RegularityModulus::FromRate { rho } => write!(f, "from_rate({rho})"),
            RegularityModulus::UserSupplied { value } => write!(f, "constant({value})"),
            RegularityModulus::Recentred { inner, shift } => {
                write!(f, "recentred({inner}, shift={shift})")
            }
        }
    }
}

/// The pieces of Theta, kept for milestone checks.
#[derive(Clone, Debug, PartialEq)]
pub struct ThetaParts {
    /// `eps^2 / (32 b)`
    pub eps_tilde: ExactPos,
    /// `mu_b(eps_tilde)`
    pub mu: ExactPos,
    /// `alpha(b, m, mu, Phi_eps)`
    pub alpha: ExactNat,
    /// `alpha + Phi_eps(alpha)`
    pub theta: ExactNat,
}

/// `mu_b(eps^2 / 32b)`, the residual level Theta asks for.
pub fn theta_target(b: &ExactNat, eps: &ExactPos, mu: &RegularityModulus, calc: &Calculus) -> Result<(ExactPos, ExactPos), RateError> {
    if b.is_zero() {
        return Err(RateError::invalid("b must be at least 1"));
    }
    let eps_tilde = eps.square().div_nat(&(b * 32u32))?;
    let level = mu.eval(b, &eps_tilde, calc).map_err(|e| e.within("Theta > mu"))?;
    Ok((eps_tilde, level))
}

pub fn theta_parts(
    b: &ExactNat,
    m: u64,
    eps: &ExactPos,
    mu: &RegularityModulus,
    calc: &Calculus,
) -> Result<ThetaParts, RateError> {
    let (eps_tilde, level) = theta_target(b, eps, mu, calc)?;
    let sixteenth = eps.square().div_nat(&ExactNat::from(16u32))?;
    let phi_eps = calc
        .liminf_rate(b, m, &sixteenth)
        .map_err(|e| e.within("Theta > Phi_eps"))?;
    let alpha = calc
        .alpha(b, m, &level, &phi_eps)
        .map_err(|e| e.within("Theta"))?;
    let tail = phi_eps
        .eval(&alpha, &calc.caps)
        .map_err(|e| e.within("Theta > Phi_eps"))?;
    Ok(ThetaParts {
        eps_tilde,
        mu: level,
        theta: &alpha + tail,
        alpha,
    })
}

/// `Theta(b, m, eps) = alpha(b, m, mu_b(eps~), Phi_eps) + Phi_eps(alpha(...))`
/// with `eps~ = eps^2/(32 b)` and `Phi_eps(N) = Phi(b, m, eps^2/16, N)`.
#[allow(non_snake_case)]
pub fn rate_Theta(b: &ExactNat, m: u64, eps: &ExactPos, mu: &RegularityModulus) -> Result<ExactNat, RateError> {
    theta_parts(b, m, eps, mu, &Calculus::default()).map(|p| p.theta)
}

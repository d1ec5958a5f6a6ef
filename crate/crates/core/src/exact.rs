//! Exact naturals and positive rationals used by every rate function.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::RateError;

/// Arbitrary-precision natural number.
pub type ExactNat = BigUint;

/// A strictly positive rational in lowest terms.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExactPos(BigRational);

impl ExactPos {
    pub fn new(value: BigRational) -> Result<Self, RateError> {
        if !value.is_positive() {
            return Err(RateError::invalid(format!("expected a positive rational, got {value}")));
        }
        Ok(ExactPos(value))
    }

    pub fn from_ratio(numer: u64, denom: u64) -> Result<Self, RateError> {
        if denom == 0 {
            return Err(RateError::invalid("zero denominator"));
        }
        ExactPos::new(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    pub fn from_integer(n: u64) -> Result<Self, RateError> {
        ExactPos::from_ratio(n, 1)
    }

    pub fn from_nat(n: &ExactNat) -> Result<Self, RateError> {
        ExactPos::new(BigRational::from_integer(BigInt::from(n.clone())))
    }

    pub fn one() -> Self {
        ExactPos(BigRational::one())
    }

    pub fn as_rational(&self) -> &BigRational {
        &self.0
    }

    pub fn into_rational(self) -> BigRational {
        self.0
    }

    pub fn numer(&self) -> BigUint {
        self.0.numer().magnitude().clone()
    }

    pub fn denom(&self) -> BigUint {
        self.0.denom().magnitude().clone()
    }

    /// Total bit size of numerator and denominator.
    pub fn bits(&self) -> u64 {
        self.0.numer().bits() + self.0.denom().bits()
    }

    pub fn mul(&self, other: &ExactPos) -> ExactPos {
        ExactPos(&self.0 * &other.0)
    }

    pub fn div(&self, other: &ExactPos) -> ExactPos {
        ExactPos(&self.0 / &other.0)
    }

    pub fn add(&self, other: &ExactPos) -> ExactPos {
        ExactPos(&self.0 + &other.0)
    }

    pub fn mul_nat(&self, n: &ExactNat) -> Result<ExactPos, RateError> {
        ExactPos::new(&self.0 * BigRational::from_integer(BigInt::from(n.clone())))
    }

    pub fn div_nat(&self, n: &ExactNat) -> Result<ExactPos, RateError> {
        if n.is_zero() {
            return Err(RateError::invalid("division by zero"));
        }
        Ok(ExactPos(&self.0 / BigRational::from_integer(BigInt::from(n.clone()))))
    }

    pub fn square(&self) -> ExactPos {
        ExactPos(&self.0 * &self.0)
    }

    pub fn pow(&self, exp: u32) -> ExactPos {
        ExactPos(Pow::pow(&self.0, exp))
    }

    pub fn recip(&self) -> ExactPos {
        ExactPos(self.0.recip())
    }

    /// `floor(self)` as a natural.
    pub fn floor(&self) -> ExactNat {
        self.0.numer().magnitude() / self.0.denom().magnitude()
    }

    /// `ceil(self)` as a natural.
    pub fn ceil(&self) -> ExactNat {
        let (q, r) = self
            .0
            .numer()
            .magnitude()
            .div_rem(self.0.denom().magnitude());
        if r.is_zero() {
            q
        } else {
            q + 1u32
        }
    }

    /// Nearest `f64` (for comparisons against floating-point traces).
    pub fn to_f64(&self) -> f64 {
        ratio_to_f64(self.0.numer().magnitude(), self.0.denom().magnitude())
    }
}

/// `numer / denom` rounded to `f64`, robust to operands beyond `f64` range.
pub(crate) fn ratio_to_f64(numer: &BigUint, denom: &BigUint) -> f64 {
    let nb = numer.bits() as i64;
    let db = denom.bits() as i64;
    // Scale both to ~64 significant bits before converting.
    let shift_n = (nb - 64).max(0);
    let shift_d = (db - 64).max(0);
    let n = (numer >> shift_n as usize).to_f64().unwrap_or(f64::INFINITY);
    let d = (denom >> shift_d as usize).to_f64().unwrap_or(f64::INFINITY);
    let exp = shift_n - shift_d;
    let base = n / d;
    if exp > i32::MAX as i64 {
        f64::INFINITY
    } else if exp < i32::MIN as i64 {
        0.0
    } else {
        base * 2f64.powi(exp as i32)
    }
}

impl PartialOrd for ExactPos {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExactPos {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.cmp(&other.0)
    }
}

impl fmt::Display for ExactPos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

/// Parses `"p/q"`, integers, or finite decimals such as `"0.125"` exactly.
pub fn parse_rational(text: &str) -> Result<BigRational, RateError> {
    let t = text.trim();
    let bad = || RateError::Parse(format!("malformed rational {text:?}"));
    if let Some((n, d)) = t.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
        let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
        if d.is_zero() {
            return Err(RateError::Parse(format!("zero denominator in {text:?}")));
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((int, frac)) = t.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = int.starts_with('-');
        let int_part = if int.is_empty() || int == "-" || int == "+" {
            BigInt::zero()
        } else {
            BigInt::from_str(int).map_err(|_| bad())?
        };
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let frac_part = BigInt::from_str(frac).map_err(|_| bad())?;
        let magnitude = int_part.abs() * &scale + frac_part;
        let numer = if negative { -magnitude } else { magnitude };
        return Ok(BigRational::new(numer, scale));
    }
    let n = BigInt::from_str(t).map_err(|_| bad())?;
    Ok(BigRational::from_integer(n))
}

pub fn parse_nat(text: &str) -> Result<ExactNat, RateError> {
    BigUint::from_str(text.trim())
        .map_err(|_| RateError::Parse(format!("malformed natural number {text:?}")))
}

impl FromStr for ExactPos {
    type Err = RateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ExactPos::new(parse_rational(s)?)
    }
}

impl Serialize for ExactPos {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ExactPos {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Largest value printed in full; anything above is reported as capped.
pub fn display_limit() -> ExactNat {
    BigUint::from(10u32).pow(30u32)
}

/// Decimal text for values up to `10^30`, otherwise `None`.
pub fn decimal_if_small(n: &ExactNat) -> Option<String> {
    if *n <= display_limit() {
        Some(n.to_string())
    } else {
        None
    }
}

/// `ceil(log10(n))`-ish order of magnitude, from the bit length.
pub fn approx_decimal_digits(n: &ExactNat) -> u64 {
    ((n.bits() as f64) * std::f64::consts::LOG10_2).ceil() as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_integers_decimals() {
        assert_eq!(
            "1/2".parse::<ExactPos>().unwrap(),
            ExactPos::from_ratio(1, 2).unwrap()
        );
        assert_eq!("3".parse::<ExactPos>().unwrap(), ExactPos::from_integer(3).unwrap());
        assert_eq!(
            "0.125".parse::<ExactPos>().unwrap(),
            ExactPos::from_ratio(1, 8).unwrap()
        );
        assert_eq!(
            "4/6".parse::<ExactPos>().unwrap().to_string(),
            "2/3".to_string()
        );
        assert!("0".parse::<ExactPos>().is_err());
        assert!("-1/2".parse::<ExactPos>().is_err());
        assert!("1/0".parse::<ExactPos>().is_err());
        assert!("abc".parse::<ExactPos>().is_err());
        assert!("1.".parse::<ExactPos>().is_err());
    }

    #[test]
    fn floor_and_ceil() {
        let q = ExactPos::from_ratio(7, 2).unwrap();
        assert_eq!(q.floor(), BigUint::from(3u32));
        assert_eq!(q.ceil(), BigUint::from(4u32));
        let q = ExactPos::from_integer(5).unwrap();
        assert_eq!(q.floor(), q.ceil());
    }

    #[test]
    fn to_f64_handles_huge_operands() {
        let big = BigUint::from(2u32).pow(3000u32);
        assert_eq!(ratio_to_f64(&big, &(&big * 4u32)), 0.25);
        assert_eq!(ExactPos::from_ratio(1, 3).unwrap().to_f64(), 1.0 / 3.0);
    }

    #[test]
    fn display_limit_is_ten_to_thirty() {
        assert!(decimal_if_small(&display_limit()).is_some());
        assert!(decimal_if_small(&(display_limit() + 1u32)).is_none());
    }
}

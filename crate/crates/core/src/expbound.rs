//! Certified integer bounds for `e^y`, `y` a nonnegative rational.
//!
//! The value is enclosed in an interval by fixed-point arithmetic with
//! directed rounding: argument reduction `r = y / 2^k`, a truncated Taylor
//! series with a rigorous tail bound, then `k` squarings. The precision is
//! doubled until both interval ends have the same ceiling.

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::RateError;

fn ceil_div(a: &BigUint, b: &BigUint) -> BigUint {
    let (q, r) = a.div_rem(b);
    if r.is_zero() {
        q
    } else {
        q + 1u32
    }
}

/// Interval `[lo, hi] / 2^precision` containing `e^y`.
fn enclose_exp(y: &BigRational, precision: u64) -> (BigUint, BigUint) {
    let a = y.numer().magnitude().clone();
    let b = y.denom().magnitude().clone();
    let one = BigUint::one() << precision as usize;

    // Reduce until r <= 2^-s; s ~ sqrt(precision) balances terms and squarings.
    let s = ((precision as f64).sqrt() / 2.0).ceil().max(1.0) as u64;
    let int_bits = ceil_div(&a, &b).bits();
    let k = int_bits + s;

    let denom = &b << k as usize;
    let scaled = &a << precision as usize;
    let r_lo = &scaled / &denom;
    let r_hi = ceil_div(&scaled, &denom);

    let mut sum_lo = one.clone();
    let mut sum_hi = one.clone();
    let mut t_lo = one.clone();
    let mut t_hi = one.clone();
    let mut i: u64 = 1;
    loop {
        let div = BigUint::from(i) << precision as usize;
        t_lo = (&t_lo * &r_lo) / &div;
        t_hi = ceil_div(&(&t_hi * &r_hi), &div);
        sum_lo += &t_lo;
        sum_hi += &t_hi;
        i += 1;
        if t_hi <= BigUint::one() {
            break;
        }
    }
    // Tail: sum_{j>=i} r^j/j! <= 2 * r^i/i! since r <= 1/2.
    let div = BigUint::from(i) << precision as usize;
    let next = ceil_div(&(&t_hi * &r_hi), &div);
    sum_hi += next * 2u32;

    let mut lo = sum_lo;
    let mut hi = sum_hi;
    for _ in 0..k {
        lo = (&lo * &lo) >> precision as usize;
        hi = ceil_div(&(&hi * &hi), &one);
    }
    (lo, hi)
}

/// Binary splitting over `[l, r)` for the terms `prod_{j<=k} a / (b j)`:
/// returns `(P, Q, T)` with `T / Q = sum_{k=l}^{r-1} prod_{j=l}^{k} a/(b j)`.
fn split(a: u64, b: u64, l: u64, r: u64) -> (BigUint, BigUint, BigUint) {
    if r - l == 1 {
        let p = BigUint::from(a);
        return (p.clone(), BigUint::from(b) * l, p);
    }
    let mid = l + (r - l) / 2;
    let (p1, q1, t1) = split(a, b, l, mid);
    let (p2, q2, t2) = split(a, b, mid, r);
    let t = &t1 * &q2 + &p1 * &t2;
    (p1 * p2, q1 * q2, t)
}

/// `[lo, hi] / 2^precision` enclosing `e^(a/b)` for `a <= b`.
fn enclose_exp_fraction(a: u64, b: u64, precision: u64) -> (BigUint, BigUint) {
    let one = BigUint::one() << precision as usize;
    if a == 0 {
        return (one.clone(), one);
    }
    // Stop once (N+1)! > 2^(precision+2); since a/b <= 1 the tail is then
    // below one ulp.
    let mut n: u64 = 1;
    let mut log2_fact = 0.0f64;
    while log2_fact <= (precision + 2) as f64 {
        n += 1;
        log2_fact += (n as f64).log2();
    }
    let (_, q, t) = split(a, b, 1, n);
    let num = (&q + &t) << precision as usize;
    let lo = &num / &q;
    let hi = ceil_div(&num, &q) + 1u32;
    (lo, hi)
}

/// Directed-rounding power of a fixed-point interval.
fn pow_interval(base: (BigUint, BigUint), mut e: u64, precision: u64) -> (BigUint, BigUint) {
    let one = BigUint::one() << precision as usize;
    let (mut lo, mut hi) = (one.clone(), one.clone());
    let (mut b_lo, mut b_hi) = base;
    while e > 0 {
        if e & 1 == 1 {
            lo = (&lo * &b_lo) >> precision as usize;
            hi = ceil_div(&(&hi * &b_hi), &one);
        }
        e >>= 1;
        if e > 0 {
            b_lo = (&b_lo * &b_lo) >> precision as usize;
            b_hi = ceil_div(&(&b_hi * &b_hi), &one);
        }
    }
    (lo, hi)
}

/// Fast enclosure for `y = I + a/b` with word-sized parts:
/// `e^y = e^I * e^(a/b)`, with `e` itself from the series.
fn enclose_exp_small(int_part: u64, a: u64, b: u64, precision: u64) -> (BigUint, BigUint) {
    let e = enclose_exp_fraction(1, 1, precision);
    let (i_lo, i_hi) = pow_interval(e, int_part, precision);
    let (f_lo, f_hi) = enclose_exp_fraction(a, b, precision);
    let one = BigUint::one() << precision as usize;
    ((&i_lo * &f_lo) >> precision as usize, ceil_div(&(&i_hi * &f_hi), &one))
}

/// Splits `y` into `(I, a, b)` with `y = I + a/b`, `a < b`, when all fit in
/// 32 bits (so `b * i` stays within a word for any realistic term count).
fn small_parts(y: &BigRational) -> Option<(u64, u64, u64)> {
    let n = y.numer().magnitude().to_u64()?;
    let d = y.denom().magnitude().to_u64()?;
    if d > u32::MAX as u64 || n / d > u32::MAX as u64 {
        return None;
    }
    Some((n / d, n % d, d))
}

/// Estimated bit length of `e^y`.
pub fn exp_bits_estimate(y: &BigRational) -> f64 {
    let f = crate::exact::ratio_to_f64(y.numer().magnitude(), y.denom().magnitude());
    f * std::f64::consts::LOG2_E
}

/// `ceil(e^y)` for rational `y >= 0`, computed exactly.
///
/// For `y > 0` this equals `floor(e^y) + 1`, since `e^y` is irrational.
/// Fails with a resource error when `e^y` would need more than `max_bits`
/// bits.
pub fn ceil_exp(y: &BigRational, max_bits: u64) -> Result<BigUint, RateError> {
    if y.is_negative() {
        return Err(RateError::invalid("exponent must be nonnegative"));
    }
    if y.is_zero() {
        return Ok(BigUint::one());
    }
    let est = exp_bits_estimate(y);
    if !est.is_finite() || est > max_bits as f64 {
        return Err(RateError::resource(
            "exp",
            format!("e^y needs about {est:.0} bits (cap {max_bits})"),
        ));
    }
    let mut precision = est.ceil() as u64 + 96;
    for _ in 0..8 {
        let (lo, hi, used) = match small_parts(y) {
            Some((i, a, b)) => {
                // Each squaring in the power roughly doubles the relative error.
                let p = precision + 2 * u64::from(64 - i.leading_zeros()) + 64;
                let (lo, hi) = enclose_exp_small(i, a, b, p);
                (lo, hi, p)
            }
            None => {
                let (lo, hi) = enclose_exp(y, precision);
                (lo, hi, precision)
            }
        };
        let one = BigUint::one() << used as usize;
        let c_lo = ceil_div(&lo, &one);
        let c_hi = ceil_div(&hi, &one);
        if c_lo == c_hi {
            return Ok(c_hi);
        }
        precision *= 2;
    }
    Err(RateError::resource(
        "exp",
        "interval for e^y did not separate from an integer",
    ))
}

/// Interval of `f64` values bracketing `e^y` (for reports and tests).
pub fn exp_interval_f64(y: &BigRational) -> Option<(f64, f64)> {
    let est = exp_bits_estimate(y);
    if est > 1000.0 {
        return None;
    }
    let precision = 128;
    let (lo, hi) = enclose_exp(y, precision);
    let scale = 2f64.powi(-(precision as i32));
    Some((lo.to_f64()? * scale, hi.to_f64()? * scale))
}

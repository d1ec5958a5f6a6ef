//! Second transcription of the rate formulas, written directly over
//! `BigRational` and closures. `None` means a cap was hit.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Nat = BigUint;
pub type Q = BigRational;

pub const MAX_ITER: u64 = 1_000_000;
pub const MAX_BITS: u64 = 1 << 20;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qn(n: &Nat) -> Q {
    Q::from_integer(BigInt::from(n.clone()))
}

fn floor_nat(x: &Q) -> Nat {
    x.floor().to_integer().to_biguint().expect("nonnegative")
}

fn ceil_nat(x: &Q) -> Nat {
    x.ceil().to_integer().to_biguint().expect("nonnegative")
}

fn small(n: Nat) -> Option<Nat> {
    (n.bits() <= MAX_BITS).then_some(n)
}

fn small_q(x: Q) -> Option<Q> {
    (x.numer().bits() <= MAX_BITS && x.denom().bits() <= MAX_BITS).then_some(x)
}

/// `ceil(e^y)` from an exact partial sum of the exponential series, kept as
/// one integer fraction (Horner form, no gcds), plus a geometric tail bound.
/// `None` when `e^y` is over the bit cap. Panics for `y > 20000`, which the
/// tests never reach below the cap.
pub fn ceil_exp(y: &Q) -> Option<Nat> {
    assert!(!y.is_negative());
    if y.is_zero() {
        return Some(Nat::one());
    }
    if y.to_f64()? * std::f64::consts::LOG2_E > MAX_BITS as f64 {
        return None;
    }
    assert!(*y <= q(20000, 1), "dual oracle is not meant for y = {y}");
    let a = y.numer().to_biguint().unwrap();
    let b = y.denom().to_biguint().unwrap();
    let yf = y.to_f64().unwrap();
    let mut k_max = (2.0 * yf).ceil() as u64 + 8;
    loop {
        // H_K = 1, H_{k-1} = 1 + (y/k) H_k, H_k = num/den.
        let mut num = Nat::one();
        let mut den = Nat::one();
        for k in (1..=k_max).rev() {
            let new_den = &den * &b * k;
            num = &new_den + &a * &num;
            den = new_den;
        }
        // Tail after the K-th term is at most 2 y^(K+1)/(K+1)! since
        // y/(K+2) < 1/2; den = b^K K!, so the tail is 2 a^(K+1) / (den b (K+1)).
        let scale = &b * (k_max + 1);
        let upper = (&num * &scale + a.pow(k_max as u32 + 1) * 2u32) / (&den * &scale);
        let lo = &num / &den;
        let hi = upper;
        if lo == hi {
            return Some(lo + 1u32);
        }
        k_max *= 2;
    }
}

pub fn psi(b_bound: &Q, eps: &Q, f: &dyn Fn(&Nat) -> Option<Nat>) -> Option<Nat> {
    let r = floor_nat(&(b_bound / eps)).to_u64()?;
    if r > MAX_ITER {
        return None;
    }
    let mut p = Nat::zero();
    for _ in 0..r {
        let fp = f(&p)?;
        p = small(&p + fp + 1u32)?;
    }
    Some(p)
}

pub fn phi(b_bound: &Nat, m: u64, eps: &Q, n: &Nat) -> Option<Nat> {
    let base = qn(&(b_bound * (m + 1))) / eps;
    let e = ceil_exp(&(&base * &base))?;
    small(e * (n + 1u32))
}

pub fn big_phi(b: &Nat, m: u64, eps: &Q, n: &Nat) -> Option<Nat> {
    phi(&(b * b), m, eps, n)
}

pub fn alpha(b: &Nat, m: u64, eps: &Q, f: &dyn Fn(&Nat) -> Option<Nat>) -> Option<Nat> {
    let shifted = |n: &Nat| f(n).map(|v| v + (m - 2));
    let e = eps / q(m as i64 - 1, 1);
    psi(&qn(&(b * b)), &(&e * &e), &shifted)
}

pub fn beta(b: &Nat, eps: &Q, delta: &dyn Fn(&Q) -> Option<Q>) -> Option<Q> {
    let c = qn(&(b * 24u32));
    let tilde = |xi: &Q| -> Option<Q> {
        let s = xi * xi / &c;
        let d = delta(&s)?;
        small_q(if d < s { d } else { s })
    };
    let b4 = qn(&(b * b * b * b));
    let top = ceil_nat(&(q(4, 1) * b4 / (eps * eps))).to_u64()?;
    if top > MAX_ITER {
        return None;
    }
    let mut cur = Q::one();
    let mut best = cur.clone();
    for _ in 0..top {
        cur = tilde(&cur)?;
        if cur < best {
            best = cur.clone();
        }
    }
    small_q(&best * &best / c)
}

/// `gamma` with the prefix minimum of Delta supplied directly.
pub fn gamma(b: &Nat, m: u64, eps: &Q, delta_tilde: &dyn Fn(&Nat) -> Q) -> Option<Nat> {
    assert!(*eps <= Q::one());
    let quarter = eps * eps / q(4, 1);
    let phi_eps = |n: &Nat| big_phi(b, m, &quarter, n);
    let alpha_bar = |eta: &Q| alpha(b, m, eta, &phi_eps);
    let h = |eta: &Q| -> Option<Nat> {
        let a = alpha_bar(eta)?;
        let t = phi_eps(&a)?;
        small(a + t)
    };
    let bb = qn(b);
    let delta = |eta: &Q| -> Option<Q> {
        let hv = h(eta)?;
        let first = eps * eps / (q(8, 1) * &bb * qn(&hv));
        let second = delta_tilde(&hv);
        Some(if first < second { first } else { second })
    };
    let beta_bar = beta(b, &(eps * eps / q(2, 1)), &delta)?;
    h(&beta_bar)
}

pub fn omega(b: &Nat, m: u64, eps: &Q, f: &dyn Fn(&Nat) -> Option<Nat>) -> Option<Nat> {
    let bb = qn(b);
    let e2 = eps * eps;
    let eps_tilde = &e2 / (q(96, 1) * &bb);
    // Delta(k) = eps^2 / (48 b max{k + f(k), 1}) is antitone when f is
    // monotone, so it is its own prefix minimum.
    let delta = |k: &Nat| -> Q {
        let s = f(k).map(|v| k + v).unwrap_or_else(|| k.clone());
        let s = if s.is_zero() { Nat::one() } else { s };
        &e2 / (q(48, 1) * &bb * qn(&s))
    };
    gamma(b, m, &eps_tilde, &delta)
}

/// `Theta` for a supplied value `mu = mu_b(eps^2 / 32b)`.
pub fn theta(b: &Nat, m: u64, eps: &Q, mu: &Q) -> Option<Nat> {
    let sixteenth = eps * eps / q(16, 1);
    let phi_eps = |n: &Nat| big_phi(b, m, &sixteenth, n);
    let a = alpha(b, m, mu, &phi_eps)?;
    let t = phi_eps(&a)?;
    small(a + t)
}

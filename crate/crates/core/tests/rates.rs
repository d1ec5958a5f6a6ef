mod common;

use common::dual::{self, q, Nat, Q};
use dykstra_core::exact::ExactPos;
use dykstra_core::expbound;
use dykstra_core::rates::{nat, pos};
use dykstra_core::regularity::{modulus_orthant, theta_parts, RegularityModulus};
use dykstra_core::{Calculus, Counterfunction, NatThreshold, ThresholdFunction};
use num_traits::ToPrimitive;

fn calc() -> Calculus {
    Calculus::default()
}

fn cf(src: &str) -> Counterfunction {
    Counterfunction::parse(src).unwrap()
}

fn rat(p: &ExactPos) -> Q {
    p.as_rational().clone()
}

fn n(v: u64) -> Nat {
    Nat::from(v)
}

#[test]
fn psi_unit_values_match_dual() {
    let cases: [(u64, u64, u64, u64, &str, u64); 5] = [
        (1, 1, 1, 2, "0", 2),
        (1, 1, 2, 5, "n", 3),
        (3, 1, 1, 1, "n+1", 14),
        (2, 1, 1, 3, "2*n", 364),
        (5, 2, 3, 4, "max(n,3)", 19),
    ];
    for (bn, bd, en, ed, f, _) in cases {
        let g = cf(f);
        let core = calc().psi(&pos(bn, bd), &pos(en, ed), &g).unwrap();
        let oracle = dual::psi(&q(bn as i64, bd as i64), &q(en as i64, ed as i64), &|p| g.eval(p, &calc().caps).ok());
        assert_eq!(Some(core), oracle, "Psi({bn}/{bd}, {en}/{ed}, {f})");
    }
    // Hand-checked values: R = floor(B/eps) applications of p + f(p) + 1.
    for (bn, bd, en, ed, f, want) in cases {
        let got = calc().psi(&pos(bn, bd), &pos(en, ed), &cf(f)).unwrap();
        assert_eq!(got, nat(want), "Psi({bn}/{bd}, {en}/{ed}, {f})");
    }
}

#[test]
fn phi_and_liminf_rate_match_dual() {
    for (b, m, en, ed, big_n) in [(1u64, 2u64, 3u64, 1u64, 0u64), (1, 2, 3, 1, 7), (1, 3, 4, 1, 2), (2, 2, 6, 1, 5), (1, 2, 1, 2, 0)] {
        let core = calc().phi(&nat(b), m, &pos(en, ed), &nat(big_n)).unwrap();
        let oracle = dual::phi(&n(b), m, &q(en as i64, ed as i64), &n(big_n)).unwrap();
        assert_eq!(core, oracle, "phi_{b}({m}, {en}/{ed}, {big_n})");
        let core = calc().big_phi(&nat(b), m, &pos(en, ed), &nat(big_n)).unwrap();
        let oracle = dual::big_phi(&n(b), m, &q(en as i64, ed as i64), &n(big_n)).unwrap();
        assert_eq!(core, oracle, "Phi({b}, {m}, {en}/{ed}, {big_n})");
    }
    // y = 1: E = ceil(e) = 3.
    let e = calc().phi(&nat(1), 2, &pos(3, 1), &nat(0)).unwrap();
    assert!(nat(2) <= e && e <= nat(3));
    assert_eq!(e, nat(3));
}

#[test]
fn alpha_matches_dual() {
    for (b, m, en, ed, f) in [(1u64, 2u64, 1u64, 1u64, "0"), (1, 3, 1, 1, "n"), (2, 2, 1, 2, "1"), (1, 4, 1, 1, "n+2"), (3, 2, 1, 1, "0")] {
        let g = cf(f);
        let core = calc().alpha(&nat(b), m, &pos(en, ed), &g).unwrap();
        let oracle = dual::alpha(&n(b), m, &q(en as i64, ed as i64), &|p| g.eval(p, &calc().caps).ok()).unwrap();
        assert_eq!(core, oracle, "alpha({b}, {m}, {en}/{ed}, {f})");
    }
    assert_eq!(calc().alpha(&nat(1), 2, &pos(1, 1), &cf("0")).unwrap(), nat(1));
}

#[test]
fn beta_matches_dual() {
    let cases: [(u64, u64, u64, &str); 5] =
        [(1, 2, 1, "x"), (1, 1, 1, "min(x, 1/2)"), (2, 3, 1, "x/2"), (1, 1, 1, "x*x"), (1, 1, 2, "x*x")];
    for (b, en, ed, src) in cases {
        let t = ThresholdFunction::parse(src).unwrap();
        let core = calc().beta(&nat(b), &pos(en, ed), &t);
        let oracle = dual::beta(&n(b), &q(en as i64, ed as i64), &|xi: &Q| {
            t.eval(&ExactPos::new(xi.clone()).unwrap(), &calc()).ok().map(|v| rat(&v))
        });
        match (&core, &oracle) {
            (Ok(c), Some(o)) => assert_eq!(&rat(c), o, "beta({b}, {en}/{ed}, {src})"),
            (Err(err), None) => assert!(err.is_resource(), "{err}"),
            _ => panic!("beta({b}, {en}/{ed}, {src}): core {core:?}, dual {oracle:?}"),
        }
    }
    let got = calc().beta(&nat(1), &pos(2, 1), &ThresholdFunction::parse("x").unwrap()).unwrap();
    assert_eq!(got, pos(1, 13824));
}

#[test]
fn gamma_capped_exactly_when_dual_is() {
    for (b, m, e, cap) in [(1u64, 2u64, pos(1, 1), "1"), (1, 2, pos(1, 1), "ratio(1, n+1)")] {
        let t = NatThreshold::parse(cap).unwrap();
        let core = calc().gamma(&nat(b), m, &e, &t);
        let oracle = dual::gamma(&n(b), m, &rat(&e), &|k: &Nat| rat(&t.prefix_min(k, &calc().caps).unwrap()));
        match (&core, &oracle) {
            (Ok(c), Some(o)) => assert_eq!(c, o),
            (Err(err), None) => assert!(err.is_resource(), "{err}"),
            _ => panic!("gamma({b}, {m}, {e}, {cap}): core {core:?}, dual {oracle:?}"),
        }
    }
}

#[test]
fn omega_capped_exactly_when_dual_is() {
    for f in ["0", "1", "n"] {
        let g = cf(f);
        let core = calc().omega(&nat(1), 2, &pos(1, 1), &g);
        let oracle = dual::omega(&n(1), 2, &q(1, 1), &|p| g.eval(p, &calc().caps).ok());
        match (&core, &oracle) {
            (Ok(c), Some(o)) => assert_eq!(c, o),
            (Err(err), None) => assert!(err.is_resource(), "{err}"),
            _ => panic!("Omega(1, 2, 1, {f}): core {core:?}, dual {oracle:?}"),
        }
    }
}

#[test]
fn theta_orthant_matches_dual() {
    let mu = RegularityModulus::Orthant { m: 2 };
    let core = theta_parts(&nat(1), 2, &pos(1, 1), &mu, &calc());
    let level = modulus_orthant(2, &pos(1, 32)).unwrap();
    let oracle = dual::theta(&n(1), 2, &q(1, 1), &rat(&level));
    match (&core, &oracle) {
        (Ok(c), Some(o)) => assert_eq!(&c.theta, o),
        (Err(err), None) => assert!(err.is_resource(), "{err}"),
        _ => panic!("Theta(1, 2, 1, orthant): core {core:?}, dual {oracle:?}"),
    }
}

#[test]
fn theta_with_constant_modulus_matches_dual() {
    // mu = 1 keeps alpha at a single step, so Theta is exact.
    let mu = RegularityModulus::UserSupplied { value: pos(1, 1) };
    let parts = theta_parts(&nat(1), 2, &pos(1, 1), &mu, &calc()).unwrap();
    let oracle = dual::theta(&n(1), 2, &q(1, 1), &q(1, 1)).unwrap();
    assert_eq!(parts.theta, oracle);
    assert!(parts.theta >= parts.alpha);
}

#[test]
fn smaller_modulus_never_gives_smaller_theta() {
    let values = [pos(1, 1), pos(9, 10), pos(3, 4), pos(1, 2)];
    let mut last: Option<Nat> = None;
    for v in values {
        let mu = RegularityModulus::UserSupplied { value: v };
        let t = theta_parts(&nat(1), 2, &pos(1, 1), &mu, &calc()).unwrap().theta;
        if let Some(prev) = &last {
            assert!(&t >= prev);
        }
        last = Some(t);
    }
}

#[test]
fn alpha_antitone_in_eps_and_phi_monotone_in_n() {
    let g = cf("n");
    for i in 1..=10u64 {
        let mut prev_alpha: Option<Nat> = None;
        for j in 1..=10u64 {
            // eps increasing in j.
            let a = calc().alpha(&nat(i.min(3)), 2 + i % 3, &pos(j, 10), &g).unwrap();
            if let Some(p) = &prev_alpha {
                assert!(&a <= p, "alpha not antitone at b={i}, eps={j}/10");
            }
            prev_alpha = Some(a);
        }
        let mut prev_phi: Option<Nat> = None;
        for big_n in 0..10u64 {
            let v = calc().phi(&nat(1), 2, &pos(i + 2, 1), &nat(big_n)).unwrap();
            if let Some(p) = &prev_phi {
                assert!(&v >= p);
            }
            prev_phi = Some(v);
        }
    }
}

#[test]
fn certified_exp_is_the_exact_ceiling() {
    let mut ys = vec![q(0, 1), q(1, 3), q(1, 1), q(5, 2), q(10, 1), q(64, 1), q(2304, 1)];
    ys.extend((1..=16).map(|k| q(4 * k - 1, 4)));
    for y in ys {
        let core = expbound::ceil_exp(&y, 1 << 20).unwrap();
        let oracle = dual::ceil_exp(&y).unwrap();
        assert_eq!(core, oracle, "ceil(e^{y})");
        if y <= q(64, 1) {
            // Against f64: E - floor(e^y) is 0 or 1 up to the f64 rounding.
            let approx = y.to_f64().unwrap().exp();
            let e = core.to_f64().unwrap();
            assert!((e - approx.floor()).abs() <= 1.0 + approx * 1e-14, "y={y}: {e} vs {approx}");
        }
    }
}

#[test]
fn resource_errors_are_reported_not_panics() {
    let r = calc().psi(&pos(1, 1), &pos(1, 2_000_000), &cf("0"));
    assert!(r.unwrap_err().is_resource());
    let r = calc().phi(&nat(1000), 2, &pos(1, 1000), &nat(0));
    assert!(r.unwrap_err().is_resource());
}

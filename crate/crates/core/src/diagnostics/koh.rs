//! Sampled checks of the two technical lemmas behind the quantitative
//! projection argument.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::DiagnosticsError;
use crate::exact::ExactNat;
use crate::sets::{ConvexSet, SetFamily};
use crate::vector::Vector;

use super::{CheckReport, INEQUALITY_TOLERANCE};

/// Result of one guarded implication.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum KohOutcome {
    /// The premise failed, so nothing is asserted.
    NotApplicable,
    /// The premise held; the value is `conclusion - bound` (`<= 0` when the
    /// implication holds).
    Checked(f64),
}

/// Interpolation lemma for `T = P_C` on a ball of diameter `D`: if both
/// endpoints have residual `<= eps^2/(12 D)` then `w_t = (1-t) x1 + t x2`
/// has residual `<= eps`.
pub fn koh_interpolation_slack(set: &ConvexSet, x1: &Vector, x2: &Vector, t: f64, eps: f64, diameter: f64) -> KohOutcome {
    let premise = eps * eps / (12.0 * diameter);
    let r1 = x1.distance(&set.project_unchecked(x1));
    let r2 = x2.distance(&set.project_unchecked(x2));
    if r1 > premise || r2 > premise {
        return KohOutcome::NotApplicable;
    }
    let w = x1.scale(1.0 - t).axpy(t, x2);
    KohOutcome::Checked(w.distance(&set.project_unchecked(&w)) - eps)
}

/// Inner-product lemma: with `D >= |x - y|` and `eps in (0, D^2]`, if
/// `|u - x|^2 <= |u - w_t|^2 + eps^2/D^2` for every `t in [0, 1]` then
/// `<u - x, y - x> <= eps`.
///
/// The premise over all `t` is decided in closed form: writing
/// `a = <u - x, y - x>` and `c = |y - x|^2`, it says
/// `min_{t in [0,1]} (c t^2 - 2 a t) >= -eps^2/D^2`.
pub fn koh_inner_product_slack(u: &Vector, x: &Vector, y: &Vector, eps: f64, d: f64) -> KohOutcome {
    let dir = y - x;
    let c = dir.norm_squared();
    if d < dir.norm() || !(eps > 0.0 && eps <= d * d) {
        return KohOutcome::NotApplicable;
    }
    let a = (u - x).dot(&dir);
    let min = if a <= 0.0 || c == 0.0 {
        0.0
    } else {
        let t = (a / c).min(1.0);
        c * t * t - 2.0 * a * t
    };
    if min < -eps * eps / (d * d) {
        return KohOutcome::NotApplicable;
    }
    KohOutcome::Checked(a - eps)
}

fn random_unit<R: Rng>(rng: &mut R, dim: usize) -> Vector {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let v = Vector::new(v).expect("finite");
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v.scale(1.0 / n);
        }
    }
}

fn random_in_ball<R: Rng>(rng: &mut R, centre: &Vector, radius: f64) -> Vector {
    let dim = centre.dim();
    let r = radius * rng.gen::<f64>().powf(1.0 / dim as f64);
    centre.axpy(r, &random_unit(rng, dim))
}

fn pull_into_ball(v: Vector, centre: &Vector, radius: f64) -> Vector {
    let d = v.distance(centre);
    if d <= radius {
        v
    } else {
        centre.axpy(radius / d, &(&v - centre))
    }
}

/// Runs `trials` sampled instances of each lemma on the family's sets,
/// inside the ball of radius `b` around the family witness.
pub fn check_koh_lemmas(family: &SetFamily, b: &ExactNat, eps: f64, trials: usize, seed: u64) -> Result<CheckReport, DiagnosticsError> {
    if trials == 0 {
        return Err(DiagnosticsError::InvalidInput("trials must be at least 1".into()));
    }
    if eps.is_nan() || eps <= 0.0 {
        return Err(DiagnosticsError::InvalidInput("eps must be positive".into()));
    }
    let p = family
        .witness()
        .ok_or_else(|| DiagnosticsError::InvalidWitness("family has no witness point".into()))?
        .clone();
    let radius = crate::exact::ExactPos::from_nat(b)
        .map_err(|_| DiagnosticsError::InvalidWitness("b must be at least 1".into()))?
        .to_f64();
    let diameter = 2.0 * radius;
    let premise = eps * eps / (12.0 * diameter);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = CheckReport::new("koh_lemmas", "1e-9", INEQUALITY_TOLERANCE)
        .param("trials", trials)
        .param("eps", eps)
        .param("b", b)
        .param("seed", seed);
    let (mut checked_a, mut skipped_a, mut checked_b, mut skipped_b) = (0usize, 0usize, 0usize, 0usize);
    let dim = family.dim();

    for trial in 0..trials {
        // Interpolation lemma.
        let set = &family.sets()[trial % family.len()];
        let near = |rng: &mut ChaCha8Rng| {
            let base = set.project_unchecked(&random_in_ball(rng, &p, radius));
            let jitter = random_unit(rng, dim).scale(0.99 * premise * rng.gen::<f64>());
            pull_into_ball(&base + &jitter, &p, radius)
        };
        let (x1, x2) = match trial % 4 {
            0 => (random_in_ball(&mut rng, &p, radius), random_in_ball(&mut rng, &p, radius)),
            1 => {
                let x = near(&mut rng);
                (x.clone(), x)
            }
            _ => (near(&mut rng), near(&mut rng)),
        };
        let mut ts = vec![0.0, 0.5, 1.0];
        ts.extend((0..5).map(|_| rng.gen::<f64>()));
        let mut applicable = false;
        for t in ts {
            match koh_interpolation_slack(set, &x1, &x2, t, eps, diameter) {
                KohOutcome::NotApplicable => break,
                KohOutcome::Checked(s) => {
                    applicable = true;
                    report.observe(trial, s.max(0.0));
                }
            }
        }
        if applicable {
            checked_a += 1;
        } else {
            skipped_a += 1;
        }

        // Inner-product lemma.
        let x = random_in_ball(&mut rng, &p, radius);
        let y = random_in_ball(&mut rng, &p, radius);
        let dir = &y - &x;
        let c = dir.norm_squared();
        let d = dir.norm().ceil().max(1.0);
        let e = d * d * rng.gen_range(1e-3..=1.0);
        let u = if c > 0.0 && trial % 4 != 0 {
            // Place <u - x, y - x> near the largest value the premise allows.
            let target = e * c.sqrt() / d * rng.gen_range(-0.5..1.5);
            let along = dir.scale(target / c);
            let mut perp = random_unit(&mut rng, dim);
            perp = perp.axpy(-perp.dot(&dir) / c, &dir);
            &x + &along.axpy(rng.gen_range(0.0..radius), &perp)
        } else {
            random_in_ball(&mut rng, &p, 2.0 * radius)
        };
        match koh_inner_product_slack(&u, &x, &y, e, d) {
            KohOutcome::NotApplicable => skipped_b += 1,
            KohOutcome::Checked(s) => {
                checked_b += 1;
                let scale = 1.0 + u.norm_squared() + x.norm_squared() + y.norm_squared();
                report.observe(trial, (s / scale).max(0.0));
            }
        }
    }
    report.params.insert("interpolation_checked".into(), checked_a.to_string());
    report.params.insert("interpolation_not_applicable".into(), skipped_a.to_string());
    report.params.insert("inner_product_checked".into(), checked_b.to_string());
    report.params.insert("inner_product_not_applicable".into(), skipped_b.to_string());
    report.note = Some(format!(
        "{} instances not applicable (premise false)",
        skipped_a + skipped_b
    ));
    Ok(report.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vector;

    #[test]
    fn fixed_point_endpoints_give_zero_residual() {
        let ball = ConvexSet::ball(vector![0, 0], 1.0).unwrap();
        let x = vector![0.3, 0.2];
        assert_eq!(koh_interpolation_slack(&ball, &x, &x, 0.4, 0.5, 4.0), KohOutcome::Checked(-0.5));
    }

    #[test]
    fn violated_premise_is_not_applicable() {
        let ball = ConvexSet::ball(vector![0, 0], 1.0).unwrap();
        let eps = 0.5;
        // Residual exactly eps, far above eps^2 / (12 D).
        let x = vector![1.5, 0];
        assert_eq!(koh_interpolation_slack(&ball, &x, &x, 0.5, eps, 4.0), KohOutcome::NotApplicable);
        let u = vector![5, 0];
        assert_eq!(
            koh_inner_product_slack(&u, &vector![0, 0], &vector![1, 0], 0.1, 1.0),
            KohOutcome::NotApplicable
        );
    }

    #[test]
    fn ball_family_passes() {
        let fam = SetFamily::new(vec![
            ConvexSet::ball(vector![0, 0], 1.0).unwrap(),
            ConvexSet::ball(vector![0.5, 0], 1.0).unwrap(),
        ])
        .unwrap()
        .with_witness(vector![0.25, 0])
        .unwrap();
        let r = check_koh_lemmas(&fam, &ExactNat::from(2u32), 0.5, 1000, 11).unwrap();
        assert!(r.pass, "{r}");
        let checked: usize = r.params["interpolation_checked"].parse().unwrap();
        let inner: usize = r.params["inner_product_checked"].parse().unwrap();
        assert!(checked > 500 && inner > 300, "{:?}", r.params);
    }
}

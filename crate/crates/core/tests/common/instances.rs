//! Seeded random sets, points and feasible families.

use dykstra_core::sets::Bound;
use dykstra_core::{ConvexSet, SetDescription, SetFamily, Vector};
use rand::Rng;

pub fn vec_in<R: Rng>(rng: &mut R, dim: usize, half_width: f64) -> Vector {
    Vector::new((0..dim).map(|_| rng.gen_range(-half_width..=half_width)).collect()).unwrap()
}

fn nonzero<R: Rng>(rng: &mut R, dim: usize) -> Vector {
    loop {
        let v = vec_in(rng, dim, 1.0);
        if v.norm() > 0.2 {
            return v;
        }
    }
}

/// A random description of variant `kind` (0..6) in dimension `dim`.
pub fn random_description<R: Rng>(rng: &mut R, kind: usize, dim: usize) -> SetDescription {
    match kind % 6 {
        0 => SetDescription::Halfspace {
            a: nonzero(rng, dim),
            beta: rng.gen_range(-1.0..1.0),
        },
        1 => SetDescription::Hyperplane {
            a: nonzero(rng, dim),
            beta: rng.gen_range(-1.0..1.0),
        },
        2 => SetDescription::Ball {
            center: vec_in(rng, dim, 1.0),
            radius: rng.gen_range(0.3..1.5),
        },
        3 => {
            let lo: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.5..0.0)).collect();
            let hi: Vec<f64> = lo.iter().map(|l| l + rng.gen_range(0.1..2.0)).collect();
            let mut lo: Vec<Bound> = lo.into_iter().map(Bound).collect();
            if rng.gen_bool(0.2) {
                lo[0] = Bound(f64::NEG_INFINITY);
            }
            SetDescription::Box {
                lo,
                hi: hi.into_iter().map(Bound).collect(),
            }
        }
        4 => {
            let k = rng.gen_range(1..dim);
            SetDescription::Affine {
                basis: (0..k).map(|_| nonzero(rng, dim)).collect(),
                offset: vec_in(rng, dim, 1.0),
            }
        }
        _ => SetDescription::Simplex { dim },
    }
}

/// A family of 2 to 4 sets in `R^dim` that all contain a random point `p`,
/// with `p` attached as the witness. Sets are half-spaces, balls, boxes and
/// hyperplanes through `p`.
pub fn feasible_family<R: Rng>(rng: &mut R, dim: usize) -> SetFamily {
    let p = vec_in(rng, dim, 0.5);
    let m = rng.gen_range(2..=4);
    let sets: Vec<ConvexSet> = (0..m)
        .map(|_| match rng.gen_range(0..4) {
            0 => {
                let a = nonzero(rng, dim);
                let beta = a.dot(&p) + rng.gen_range(0.0..0.3);
                ConvexSet::halfspace(a, beta).unwrap()
            }
            1 => {
                let c = &p + &vec_in(rng, dim, 0.6);
                let r = c.distance(&p) + rng.gen_range(0.0..0.5);
                ConvexSet::ball(c, r.max(1e-3)).unwrap()
            }
            2 => {
                let lo: Vec<f64> = p.as_slice().iter().map(|v| v - rng.gen_range(0.0..0.7)).collect();
                let hi: Vec<f64> = p.as_slice().iter().map(|v| v + rng.gen_range(0.0..0.7)).collect();
                ConvexSet::boxed(lo, hi).unwrap()
            }
            _ => {
                let a = nonzero(rng, dim);
                ConvexSet::hyperplane(a.clone(), a.dot(&p)).unwrap()
            }
        })
        .collect();
    SetFamily::new(sets).unwrap().with_witness(p).unwrap()
}

/// `max(1, ceil(|x0 - p|))`.
pub fn bound_for(x0: &Vector, p: &Vector) -> u64 {
    (x0.distance(p).ceil() as u64).max(1)
}

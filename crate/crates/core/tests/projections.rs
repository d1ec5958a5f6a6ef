mod common;

use common::{grid, instances};
use dykstra_core::{ConvexSet, SetDescription, Vector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn build(d: &SetDescription) -> ConvexSet {
    ConvexSet::try_from(d.clone()).unwrap()
}

#[test]
fn projections_match_grid_argmin_in_dims_2_and_3() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for case in 0..60 {
        let dim = 2 + case % 2;
        let d = instances::random_description(&mut rng, case / 2, dim);
        let u = instances::vec_in(&mut rng, dim, 2.0);
        let p = build(&d).project(&u).unwrap();
        let g = Vector::new(grid::argmin(&d, &u)).unwrap();
        let err = p.distance(&g);
        assert!(err <= 2.0 * grid::SPACING, "case {case} {d:?} u={u:?}: |P(u) - grid| = {err}");
    }
}

#[test]
fn projection_of_interior_point_is_the_point() {
    let ball = ConvexSet::ball(Vector::new(vec![1.0, -1.0]).unwrap(), 2.0).unwrap();
    let u = Vector::new(vec![0.5, 0.0]).unwrap();
    assert_eq!(ball.project(&u).unwrap(), u);
}

#[test]
fn simplex_projection_of_far_point_is_a_vertex() {
    let s = ConvexSet::simplex(3).unwrap();
    let p = s.project(&Vector::new(vec![10.0, 0.0, 0.0]).unwrap()).unwrap();
    assert_eq!(p.as_slice(), &[1.0, 0.0, 0.0]);
}

fn case() -> impl Strategy<Value = (u64, usize, usize)> {
    (any::<u64>(), 0usize..6, 2usize..=4)
}

fn setup(seed: u64, kind: usize, dim: usize) -> (ConvexSet, Vector, Vector) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let set = build(&instances::random_description(&mut rng, kind, dim));
    let scale = rng.gen_range(0.1..20.0);
    let u = instances::vec_in(&mut rng, dim, scale);
    let v = instances::vec_in(&mut rng, dim, scale);
    (set, u, v)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn projection_is_idempotent((seed, kind, dim) in case()) {
        let (set, u, _) = setup(seed, kind, dim);
        let p = set.project(&u).unwrap();
        let pp = set.project(&p).unwrap();
        prop_assert!(p.distance(&pp) <= 1e-12 * (1.0 + p.norm()));
        prop_assert!(set.membership_violation(&p).unwrap() <= 1e-10 * (1.0 + u.norm()));
    }

    #[test]
    fn projection_is_nonexpansive((seed, kind, dim) in case()) {
        let (set, u, v) = setup(seed, kind, dim);
        let pu = set.project(&u).unwrap();
        let pv = set.project(&v).unwrap();
        prop_assert!(pu.distance(&pv) <= u.distance(&v) + 1e-12 * (1.0 + u.norm() + v.norm()));
    }

    #[test]
    fn kolmogorov_residual_is_nonpositive((seed, kind, dim) in case()) {
        let (set, u, _) = setup(seed, kind, dim);
        let r = set.kolmogorov_residual(&u, 200, seed).unwrap();
        prop_assert!(r <= 1e-9 * (1.0 + u.norm_squared()), "residual {r}");
    }

    #[test]
    fn distance_is_attained_by_projection((seed, kind, dim) in case()) {
        let (set, u, _) = setup(seed, kind, dim);
        let p = set.project(&u).unwrap();
        prop_assert_eq!(set.distance(&u).unwrap(), u.distance(&p));
    }
}

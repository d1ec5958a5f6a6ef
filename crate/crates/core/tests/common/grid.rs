//! Brute-force nearest points on lattices laid over each set variant.
//!
//! Each oracle only uses the set's defining data and the fact that a
//! nearest point of an exterior `u` lies on the boundary; no closed-form
//! projection formula is involved.

use dykstra_core::{SetDescription, Vector};

pub const SPACING: f64 = 1e-2;

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Orthonormal basis of the span of `gens` (Gram-Schmidt, test-local).
fn orthonormal(gens: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for g in gens {
        let mut w = g.clone();
        for e in &out {
            let c = dot(&w, e);
            for (wi, ei) in w.iter_mut().zip(e) {
                *wi -= c * ei;
            }
        }
        let n = dot(&w, &w).sqrt();
        if n > 1e-9 {
            out.push(w.iter().map(|v| v / n).collect());
        }
    }
    out
}

/// Orthonormal basis of the complement of `a`.
fn complement(a: &[f64]) -> Vec<Vec<f64>> {
    let dim = a.len();
    let mut gens = vec![a.to_vec()];
    for i in 0..dim {
        let mut e = vec![0.0; dim];
        e[i] = 1.0;
        gens.push(e);
    }
    let mut basis = orthonormal(&gens);
    basis.remove(0);
    basis.truncate(dim - 1);
    basis
}

/// Minimises `|u - (origin + sum t_i e_i)|` over the lattice `t in h Z^k`
/// with `|t_i - centre_i| <= radius`.
fn lattice_argmin(u: &[f64], origin: &[f64], basis: &[Vec<f64>], centre: &[f64], radius: f64, h: f64) -> Vec<f64> {
    let k = basis.len();
    let steps = (radius / h).ceil() as i64;
    let mut idx = vec![-steps; k];
    let mut best = origin.to_vec();
    let mut best_d = f64::INFINITY;
    let point = |idx: &[i64]| -> Vec<f64> {
        let mut p = origin.to_vec();
        for (j, e) in basis.iter().enumerate() {
            let t = (centre[j] / h).round() * h + idx[j] as f64 * h;
            for (pi, ei) in p.iter_mut().zip(e) {
                *pi += t * ei;
            }
        }
        p
    };
    if k == 0 {
        return best;
    }
    loop {
        let p = point(&idx);
        let d = dist2(&p, u);
        if d < best_d {
            best_d = d;
            best = p;
        }
        let mut j = 0;
        loop {
            idx[j] += 1;
            if idx[j] <= steps {
                break;
            }
            idx[j] = -steps;
            j += 1;
            if j == k {
                return best;
            }
        }
    }
}

/// Lattice nearest point on the hyperplane `<a, x> = beta`.
fn hyperplane_argmin(u: &[f64], a: &[f64], beta: f64) -> Vec<f64> {
    let na = dot(a, a);
    let origin: Vec<f64> = a.iter().map(|v| v * beta / na).collect();
    let basis = complement(a);
    let rel: Vec<f64> = u.iter().zip(&origin).map(|(x, o)| x - o).collect();
    // In-plane coordinates of the nearest point are bounded by |u - origin|.
    let radius = dot(&rel, &rel).sqrt() + SPACING;
    lattice_argmin(u, &origin, &basis, &vec![0.0; basis.len()], radius, SPACING)
}

/// Grid nearest point of `u` in the set described by `d`.
pub fn argmin(d: &SetDescription, u: &Vector) -> Vec<f64> {
    let u = u.as_slice();
    let dim = u.len();
    match d {
        SetDescription::Halfspace { a, beta } => {
            if dot(a.as_slice(), u) <= *beta {
                u.to_vec()
            } else {
                hyperplane_argmin(u, a.as_slice(), *beta)
            }
        }
        SetDescription::Hyperplane { a, beta } => hyperplane_argmin(u, a.as_slice(), *beta),
        SetDescription::Affine { basis, offset } => {
            let gens: Vec<Vec<f64>> = basis.iter().map(|v| v.as_slice().to_vec()).collect();
            let e = orthonormal(&gens);
            let rel: Vec<f64> = u.iter().zip(offset.as_slice()).map(|(x, o)| x - o).collect();
            let radius = dot(&rel, &rel).sqrt() + SPACING;
            lattice_argmin(u, offset.as_slice(), &e, &vec![0.0; e.len()], radius, SPACING)
        }
        SetDescription::Ball { center, radius } => {
            let c = center.as_slice();
            if dist2(u, c) <= radius * radius {
                return u.to_vec();
            }
            // Angular lattice on the sphere with arc spacing at most SPACING.
            let dphi = SPACING / radius;
            let mut best = c.to_vec();
            let mut best_d = f64::INFINITY;
            let mut consider = |dir: &[f64]| {
                let p: Vec<f64> = c.iter().zip(dir).map(|(ci, di)| ci + radius * di).collect();
                let d = dist2(&p, u);
                if d < best_d {
                    best_d = d;
                    best = p;
                }
            };
            let n_phi = (std::f64::consts::TAU / dphi).ceil() as usize;
            if dim == 2 {
                for i in 0..n_phi {
                    let t = i as f64 * std::f64::consts::TAU / n_phi as f64;
                    consider(&[t.cos(), t.sin()]);
                }
            } else {
                assert_eq!(dim, 3, "ball oracle supports dims 2 and 3");
                let n_theta = (std::f64::consts::PI / dphi).ceil() as usize;
                for i in 0..=n_theta {
                    let th = i as f64 * std::f64::consts::PI / n_theta as f64;
                    let ring = ((std::f64::consts::TAU * th.sin()) / dphi).ceil().max(1.0) as usize;
                    for j in 0..ring {
                        let ph = j as f64 * std::f64::consts::TAU / ring as f64;
                        consider(&[th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()]);
                    }
                }
            }
            best
        }
        SetDescription::Box { lo, hi } => (0..dim)
            .map(|i| {
                // Squared distance is separable, so each coordinate is a 1-D grid search.
                let l = lo[i].0.max(u[i] - 10.0);
                let h = hi[i].0.min(u[i] + 10.0);
                let l = l.min(h);
                let n = ((h - l) / SPACING).ceil() as usize;
                let mut best = l;
                for k in 0..=n {
                    let x = (l + k as f64 * SPACING).min(h);
                    if (x - u[i]).abs() < (best - u[i]).abs() {
                        best = x;
                    }
                }
                if (h - u[i]).abs() < (best - u[i]).abs() {
                    best = h;
                }
                best
            })
            .collect(),
        SetDescription::Simplex { .. } => {
            // Barycentric lattice with N = 100.
            let n = 100usize;
            let mut best = vec![0.0; dim];
            let mut best_d = f64::INFINITY;
            let mut counts = vec![0usize; dim];
            fn rec(i: usize, left: usize, n: usize, counts: &mut Vec<usize>, u: &[f64], best: &mut Vec<f64>, best_d: &mut f64) {
                if i + 1 == counts.len() {
                    counts[i] = left;
                    let p: Vec<f64> = counts.iter().map(|c| *c as f64 / n as f64).collect();
                    let d = dist2(&p, u);
                    if d < *best_d {
                        *best_d = d;
                        *best = p;
                    }
                    return;
                }
                for c in 0..=left {
                    counts[i] = c;
                    rec(i + 1, left - c, n, counts, u, best, best_d);
                }
            }
            rec(0, n, n, &mut counts, u, &mut best, &mut best_d);
            best
        }
    }
}

//! Closed convex sets of `R^d` with closed-form metric projections.
//!
//! Every variant is validated on construction, so a `ConvexSet` value is
//! always nonempty, closed and convex. Projections are pure functions.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::SetError;
use crate::vector::Vector;

/// Relative scale for membership checks: `tol * (1 + |u|)`.
pub const MEMBERSHIP_TOLERANCE: f64 = 1e-10;

/// Orthonormality tolerance for affine-subspace bases.
pub const ORTHONORMAL_TOLERANCE: f64 = 1e-12;

/// `{x : <a, x> <= beta}`
#[derive(Clone, Debug, PartialEq)]
pub struct Halfspace {
    normal: Vector,
    offset: f64,
    normal_sq: f64,
}

/// `{x : <a, x> = beta}`
#[derive(Clone, Debug, PartialEq)]
pub struct Hyperplane {
    normal: Vector,
    offset: f64,
    normal_sq: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Ball {
    center: Vector,
    radius: f64,
}

/// Axis-aligned box with extended-real bounds. Infinite bounds encode
/// orthants and axis-aligned half-spaces.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxSet {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

/// `offset + span(basis)` with the basis kept orthonormal.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineSubspace {
    basis: Vec<Vector>,
    offset: Vector,
}

/// The standard probability simplex `{x >= 0, sum x = 1}` in `R^dim`.
#[derive(Clone, Debug, PartialEq)]
pub struct Simplex {
    dim: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ConvexSet {
    Halfspace(Halfspace),
    Hyperplane(Hyperplane),
    Ball(Ball),
    Box(BoxSet),
    AffineSubspace(AffineSubspace),
    Simplex(Simplex),
}

fn nonzero_normal(a: &Vector) -> Result<f64, SetError> {
    let sq = a.norm_squared();
    if sq == 0.0 || !sq.is_finite() {
        return Err(SetError::invalid("normal vector must be nonzero"));
    }
    Ok(sq)
}

impl ConvexSet {
    pub fn halfspace(normal: Vector, offset: f64) -> Result<Self, SetError> {
        if !offset.is_finite() {
            return Err(SetError::invalid("halfspace offset must be finite"));
        }
        let normal_sq = nonzero_normal(&normal)?;
        Ok(ConvexSet::Halfspace(Halfspace {
            normal,
            offset,
            normal_sq,
        }))
    }

    pub fn hyperplane(normal: Vector, offset: f64) -> Result<Self, SetError> {
        if !offset.is_finite() {
            return Err(SetError::invalid("hyperplane offset must be finite"));
        }
        let normal_sq = nonzero_normal(&normal)?;
        Ok(ConvexSet::Hyperplane(Hyperplane {
            normal,
            offset,
            normal_sq,
        }))
    }

    pub fn ball(center: Vector, radius: f64) -> Result<Self, SetError> {
        if radius < 0.0 || !radius.is_finite() {
            return Err(SetError::invalid(format!(
                "ball radius must be finite and >= 0, got {radius}"
            )));
        }
        Ok(ConvexSet::Ball(Ball { center, radius }))
    }

    pub fn boxed(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self, SetError> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(SetError::invalid(format!(
                "box bounds must have equal positive length, got {} and {}",
                lo.len(),
                hi.len()
            )));
        }
        for (i, (l, h)) in lo.iter().zip(&hi).enumerate() {
            if l.is_nan() || h.is_nan() || l > h || *l == f64::INFINITY || *h == f64::NEG_INFINITY
            {
                return Err(SetError::invalid(format!(
                    "box bounds must satisfy lo <= hi with a nonempty interval at coordinate {i}: [{l}, {h}]"
                )));
            }
        }
        Ok(ConvexSet::Box(BoxSet { lo, hi }))
    }

    /// The whole space `R^dim`, as a box with infinite bounds.
    pub fn whole_space(dim: usize) -> Self {
        ConvexSet::Box(BoxSet {
            lo: vec![f64::NEG_INFINITY; dim],
            hi: vec![f64::INFINITY; dim],
        })
    }

    /// Builds `offset + span(basis)`. The basis is orthonormalized by
    /// modified Gram-Schmidt; linearly dependent generators are rejected.
    pub fn affine(basis: Vec<Vector>, offset: Vector) -> Result<Self, SetError> {
        let dim = offset.dim();
        let mut ortho: Vec<Vector> = Vec::with_capacity(basis.len());
        for (i, v) in basis.into_iter().enumerate() {
            v.check_dim(dim)?;
            let scale = v.norm();
            if scale == 0.0 {
                return Err(SetError::invalid(format!("basis vector {i} is zero")));
            }
            let mut w = v;
            // Two passes keep the result orthonormal to working precision.
            for _ in 0..2 {
                for e in &ortho {
                    let c = w.dot(e);
                    w = w.axpy(-c, e);
                }
            }
            let n = w.norm();
            if n <= 1e-10 * scale {
                return Err(SetError::invalid(format!(
                    "basis vector {i} is linearly dependent on the previous ones"
                )));
            }
            ortho.push(w.scale(1.0 / n));
        }
        let set = AffineSubspace {
            basis: ortho,
            offset,
        };
        debug_assert!(set.orthonormality_defect() <= ORTHONORMAL_TOLERANCE);
        Ok(ConvexSet::AffineSubspace(set))
    }

    pub fn simplex(dim: usize) -> Result<Self, SetError> {
        if dim == 0 {
            return Err(SetError::invalid("simplex dimension must be >= 1"));
        }
        Ok(ConvexSet::Simplex(Simplex { dim }))
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexSet::Halfspace(h) => h.normal.dim(),
            ConvexSet::Hyperplane(h) => h.normal.dim(),
            ConvexSet::Ball(b) => b.center.dim(),
            ConvexSet::Box(b) => b.lo.len(),
            ConvexSet::AffineSubspace(a) => a.offset.dim(),
            ConvexSet::Simplex(s) => s.dim,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            ConvexSet::Halfspace(_) => "halfspace",
            ConvexSet::Hyperplane(_) => "hyperplane",
            ConvexSet::Ball(_) => "ball",
            ConvexSet::Box(_) => "box",
            ConvexSet::AffineSubspace(_) => "affine",
            ConvexSet::Simplex(_) => "simplex",
        }
    }

    /// True when the set is an affine subspace (hyperplanes included, and
    /// boxes whose every coordinate is either free or pinned).
    pub fn is_affine(&self) -> bool {
        match self {
            ConvexSet::AffineSubspace(_) | ConvexSet::Hyperplane(_) => true,
            ConvexSet::Box(b) => b.lo.iter().zip(&b.hi).all(|(l, h)| {
                (l.is_infinite() && h.is_infinite()) || l == h
            }),
            _ => false,
        }
    }

    /// Metric projection `P(u)`: the unique nearest point of the set.
    pub fn project(&self, u: &Vector) -> Result<Vector, SetError> {
        u.check_dim(self.dim())?;
        Ok(self.project_unchecked(u))
    }

    pub(crate) fn project_unchecked(&self, u: &Vector) -> Vector {
        match self {
            ConvexSet::Halfspace(h) => {
                let excess = h.normal.dot(u) - h.offset;
                if excess <= 0.0 {
                    u.clone()
                } else {
                    u.axpy(-excess / h.normal_sq, &h.normal)
                }
            }
            ConvexSet::Hyperplane(h) => {
                let excess = h.normal.dot(u) - h.offset;
                if excess == 0.0 {
                    u.clone()
                } else {
                    u.axpy(-excess / h.normal_sq, &h.normal)
                }
            }
            ConvexSet::Ball(b) => {
                let d = u - &b.center;
                let dist = d.norm();
                if dist <= b.radius {
                    u.clone()
                } else {
                    b.center.axpy(b.radius / dist, &d)
                }
            }
            ConvexSet::Box(b) => Vector::from_raw(
                u.as_slice()
                    .iter()
                    .zip(b.lo.iter().zip(&b.hi))
                    .map(|(v, (l, h))| v.clamp(*l, *h))
                    .collect(),
            ),
            ConvexSet::AffineSubspace(a) => {
                let rel = u - &a.offset;
                let mut out = a.offset.clone();
                for e in &a.basis {
                    out = out.axpy(rel.dot(e), e);
                }
                out
            }
            ConvexSet::Simplex(_) => project_simplex(u),
        }
    }

    /// How far `x` is from satisfying the set's defining constraints,
    /// computed from the constraints themselves rather than the projection.
    pub fn membership_violation(&self, x: &Vector) -> Result<f64, SetError> {
        x.check_dim(self.dim())?;
        Ok(match self {
            ConvexSet::Halfspace(h) => {
                ((h.normal.dot(x) - h.offset) / h.normal_sq.sqrt()).max(0.0)
            }
            ConvexSet::Hyperplane(h) => {
                ((h.normal.dot(x) - h.offset) / h.normal_sq.sqrt()).abs()
            }
            ConvexSet::Ball(b) => (x.distance(&b.center) - b.radius).max(0.0),
            ConvexSet::Box(b) => x
                .as_slice()
                .iter()
                .zip(b.lo.iter().zip(&b.hi))
                .map(|(v, (l, h))| (l - v).max(v - h).max(0.0))
                .map(|e| e * e)
                .sum::<f64>()
                .sqrt(),
            ConvexSet::AffineSubspace(a) => {
                let rel = x - &a.offset;
                let mut tangent = Vector::zeros(x.dim());
                for e in &a.basis {
                    tangent = tangent.axpy(rel.dot(e), e);
                }
                rel.distance(&tangent)
            }
            ConvexSet::Simplex(_) => {
                let neg: f64 = x.as_slice().iter().map(|v| (-v).max(0.0)).fold(0.0, f64::max);
                let sum: f64 = x.as_slice().iter().sum();
                neg.max((sum - 1.0).abs())
            }
        })
    }

    /// Membership up to `MEMBERSHIP_TOLERANCE * (1 + |x|)`.
    pub fn contains(&self, x: &Vector) -> Result<bool, SetError> {
        let v = self.membership_violation(x)?;
        Ok(v <= MEMBERSHIP_TOLERANCE * (1.0 + x.norm()))
    }

    /// `|u - P(u)|`
    pub fn distance(&self, u: &Vector) -> Result<f64, SetError> {
        let p = self.project(u)?;
        Ok(u.distance(&p))
    }

    /// Maximum of `<u - P(u), y - P(u)>` over `samples` seeded points `y`
    /// of the set. For an exact projection the supremum over the set is 0.
    ///
    /// Points are drawn by projecting ambient samples around `P(u)` at
    /// several length scales, so both the far field and the neighbourhood
    /// of `P(u)` are probed.
    pub fn kolmogorov_residual(
        &self,
        u: &Vector,
        samples: usize,
        seed: u64,
    ) -> Result<f64, SetError> {
        if samples == 0 {
            return Err(SetError::invalid("samples must be >= 1"));
        }
        let p = self.project(u)?;
        let normal = u - &p;
        if normal.is_zero() {
            return Ok(0.0);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scale = 1.0 + u.norm() + p.norm();
        let mut worst = f64::NEG_INFINITY;
        for k in 0..samples {
            let s = scale * 10f64.powi(-((k % 5) as i32));
            let y = self.sample_member(&mut rng, &p, s);
            worst = worst.max(normal.dot(&(&y - &p)));
        }
        Ok(worst)
    }

    /// A point of the set obtained by projecting a uniform sample from the
    /// cube of half-width `scale` around `center`.
    pub fn sample_member<R: Rng>(&self, rng: &mut R, center: &Vector, scale: f64) -> Vector {
        let ambient = Vector::from_raw(
            center
                .as_slice()
                .iter()
                .map(|c| c + rng.gen_range(-scale..=scale))
                .collect(),
        );
        self.project_unchecked(&ambient)
    }
}

impl AffineSubspace {
    pub fn basis(&self) -> &[Vector] {
        &self.basis
    }

    pub fn offset(&self) -> &Vector {
        &self.offset
    }

    /// Largest entry of `|B^T B - I|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in self.basis.iter().enumerate() {
            for (j, b) in self.basis.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((a.dot(b) - target).abs());
            }
        }
        worst
    }
}

impl Halfspace {
    pub fn normal(&self) -> &Vector {
        &self.normal
    }
    pub fn offset(&self) -> f64 {
        self.offset
    }
}

impl Hyperplane {
    pub fn normal(&self) -> &Vector {
        &self.normal
    }
    pub fn offset(&self) -> f64 {
        self.offset
    }
}

impl Ball {
    pub fn center(&self) -> &Vector {
        &self.center
    }
    pub fn radius(&self) -> f64 {
        self.radius
    }
}

impl BoxSet {
    pub fn lo(&self) -> &[f64] {
        &self.lo
    }
    pub fn hi(&self) -> &[f64] {
        &self.hi
    }
}

/// Sort-and-threshold projection onto the probability simplex.
fn project_simplex(u: &Vector) -> Vector {
    let mut sorted: Vec<f64> = u.as_slice().to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (j, v) in sorted.iter().enumerate() {
        cumulative += v;
        let candidate = (cumulative - 1.0) / (j + 1) as f64;
        if v - candidate > 0.0 {
            theta = candidate;
        }
    }
    Vector::from_raw(u.as_slice().iter().map(|v| (v - theta).max(0.0)).collect())
}

impl fmt::Display for ConvexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConvexSet::Halfspace(h) => write!(f, "halfspace(<{}, x> <= {})", h.normal, h.offset),
            ConvexSet::Hyperplane(h) => write!(f, "hyperplane(<{}, x> = {})", h.normal, h.offset),
            ConvexSet::Ball(b) => write!(f, "ball({}, {})", b.center, b.radius),
            ConvexSet::Box(b) => write!(f, "box({:?}, {:?})", b.lo, b.hi),
            ConvexSet::AffineSubspace(a) => {
                write!(f, "affine({} + span of {} vectors)", a.offset, a.basis.len())
            }
            ConvexSet::Simplex(s) => write!(f, "simplex({})", s.dim),
        }
    }
}

/// An extended-real bound; serialized as a number or as `"inf"`/`"-inf"`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bound(pub f64);

impl Serialize for Bound {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if self.0 == f64::INFINITY {
            serializer.serialize_str("inf")
        } else if self.0 == f64::NEG_INFINITY {
            serializer.serialize_str("-inf")
        } else {
            serializer.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Bound {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Num(v) => Ok(Bound(v)),
            Raw::Text(s) => match s.trim() {
                "inf" | "+inf" | "infinity" => Ok(Bound(f64::INFINITY)),
                "-inf" | "-infinity" => Ok(Bound(f64::NEG_INFINITY)),
                other => Err(serde::de::Error::custom(format!(
                    "expected a number, \"inf\" or \"-inf\", got {other:?}"
                ))),
            },
        }
    }
}

/// Plain-data description of a set, as written in experiment configs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SetDescription {
    Halfspace { a: Vector, beta: f64 },
    Hyperplane { a: Vector, beta: f64 },
    Ball { center: Vector, radius: f64 },
    Box { lo: Vec<Bound>, hi: Vec<Bound> },
    Affine { basis: Vec<Vector>, offset: Vector },
    Simplex { dim: usize },
}

impl TryFrom<SetDescription> for ConvexSet {
    type Error = SetError;

    fn try_from(d: SetDescription) -> Result<Self, SetError> {
        match d {
            SetDescription::Halfspace { a, beta } => ConvexSet::halfspace(a, beta),
            SetDescription::Hyperplane { a, beta } => ConvexSet::hyperplane(a, beta),
            SetDescription::Ball { center, radius } => ConvexSet::ball(center, radius),
            SetDescription::Box { lo, hi } => ConvexSet::boxed(
                lo.into_iter().map(|b| b.0).collect(),
                hi.into_iter().map(|b| b.0).collect(),
            ),
            SetDescription::Affine { basis, offset } => ConvexSet::affine(basis, offset),
            SetDescription::Simplex { dim } => ConvexSet::simplex(dim),
        }
    }
}

impl From<&ConvexSet> for SetDescription {
    fn from(s: &ConvexSet) -> Self {
        match s {
            ConvexSet::Halfspace(h) => SetDescription::Halfspace {
                a: h.normal.clone(),
                beta: h.offset,
            },
            ConvexSet::Hyperplane(h) => SetDescription::Hyperplane {
                a: h.normal.clone(),
                beta: h.offset,
            },
            ConvexSet::Ball(b) => SetDescription::Ball {
                center: b.center.clone(),
                radius: b.radius,
            },
            ConvexSet::Box(b) => SetDescription::Box {
                lo: b.lo.iter().map(|v| Bound(*v)).collect(),
                hi: b.hi.iter().map(|v| Bound(*v)).collect(),
            },
            ConvexSet::AffineSubspace(a) => SetDescription::Affine {
                basis: a.basis.clone(),
                offset: a.offset.clone(),
            },
            ConvexSet::Simplex(s) => SetDescription::Simplex { dim: s.dim },
        }
    }
}

impl Serialize for ConvexSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        SetDescription::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ConvexSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let d = SetDescription::deserialize(deserializer)?;
        ConvexSet::try_from(d).map_err(serde::de::Error::custom)
    }
}

/// Witness points must lie within this distance of every set.
pub const WITNESS_TOLERANCE: f64 = 1e-9;

/// An ordered family `C_1, ..., C_m` (m >= 2) of sets in a common dimension,
/// optionally carrying a point claimed to lie in every set.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SetFamily {
    sets: Vec<ConvexSet>,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<Vector>,
}

impl SetFamily {
    pub fn new(sets: Vec<ConvexSet>) -> Result<Self, SetError> {
        if sets.len() < 2 {
            return Err(SetError::invalid(format!(
                "a family needs at least 2 sets, got {}",
                sets.len()
            )));
        }
        let dim = sets[0].dim();
        for (j, s) in sets.iter().enumerate() {
            if s.dim() != dim {
                return Err(SetError::invalid(format!(
                    "set {} has dimension {}, expected {dim}",
                    j + 1,
                    s.dim()
                )));
            }
        }
        Ok(SetFamily {
            sets,
            witness: None,
        })
    }

    /// Attaches `p`, rejecting it unless it is within `WITNESS_TOLERANCE`
    /// of every set.
    pub fn with_witness(mut self, p: Vector) -> Result<Self, SetError> {
        p.check_dim(self.dim())?;
        for (j, s) in self.sets.iter().enumerate() {
            let d = s.distance(&p)?;
            if d > WITNESS_TOLERANCE {
                return Err(SetError::invalid(format!(
                    "witness {p} is at distance {d:e} from set {}",
                    j + 1
                )));
            }
        }
        self.witness = Some(p);
        Ok(self)
    }

    pub fn sets(&self) -> &[ConvexSet] {
        &self.sets
    }

    /// Number of sets `m`.
    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.sets[0].dim()
    }

    pub fn witness(&self) -> Option<&Vector> {
        self.witness.as_ref()
    }

    /// The set used at step `n >= 1`: `C_{j_n}` with `j_n = ((n-1) mod m) + 1`.
    pub fn set_for_step(&self, n: usize) -> &ConvexSet {
        assert!(n >= 1, "steps are numbered from 1");
        &self.sets[(n - 1) % self.sets.len()]
    }

    /// `max_j |x - P_j(x)|`
    pub fn max_residual(&self, x: &Vector) -> Result<f64, SetError> {
        let mut worst: f64 = 0.0;
        for s in &self.sets {
            worst = worst.max(s.distance(x)?);
        }
        Ok(worst)
    }

    pub fn residuals(&self, x: &Vector) -> Result<Vec<f64>, SetError> {
        self.sets.iter().map(|s| s.distance(x)).collect()
    }

    pub fn all_affine(&self) -> bool {
        self.sets.iter().all(ConvexSet::is_affine)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilyDescription {
    sets: Vec<ConvexSet>,
    #[serde(default)]
    witness: Option<Vector>,
}

impl<'de> Deserialize<'de> for SetFamily {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let d = FamilyDescription::deserialize(deserializer)?;
        let family = SetFamily::new(d.sets).map_err(serde::de::Error::custom)?;
        match d.witness {
            Some(p) => family.with_witness(p).map_err(serde::de::Error::custom),
            None => Ok(family),
        }
    }
}

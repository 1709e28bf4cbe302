//! Halfspace-based convex geometry in arbitrary (small) dimension.
//!
//! Conventions:
//! - A [`Halfspace`] is `{x : normal·x <= bound}` with a unit-length normal.
//! - An [`HPolyhedron`] is a finite intersection of halfspaces; the empty list
//!   is the whole space. Emptiness, interior and boundedness flags are computed
//!   once at construction by LP and never change afterwards.
//! - Points and directions are plain `Vec<f64>` / slices.

use serde::{Deserialize, Serialize};

use crate::error::GeomError;
use crate::lp::{LpOutcome, LpProblem};

/// Feasibility tolerance for LP certificates.
pub const EPS_LP: f64 = 1e-9;
/// Tolerance for geometric predicates (slack, membership, coincidence).
pub const EPS_GEO: f64 = 1e-7;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

/// `λ(x) = gradient·x + offset`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineFunc {
    pub gradient: Vec<f64>,
    pub offset: f64,
}

impl AffineFunc {
    pub fn new(gradient: Vec<f64>, offset: f64) -> Self {
        Self { gradient, offset }
    }

    pub fn zero(dim: usize) -> Self {
        Self::new(vec![0.0; dim], 0.0)
    }

    pub fn dim(&self) -> usize {
        self.gradient.len()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        dot(&self.gradient, x) + self.offset
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::new(scale(&self.gradient, s), self.offset * s)
    }

    pub fn plus(&self, other: &AffineFunc) -> Self {
        Self::new(
            add(&self.gradient, &other.gradient),
            self.offset + other.offset,
        )
    }
}

/// Closed halfspace `{x : normal·x <= bound}`, normal of unit length.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Halfspace {
    normal: Vec<f64>,
    bound: f64,
}

impl Halfspace {
    /// Normalizes `normal` to unit length.
    pub fn new(normal: Vec<f64>, bound: f64) -> Result<Self, GeomError> {
        let len = norm(&normal);
        if !(len > 1e-14) || !len.is_finite() || !bound.is_finite() {
            return Err(GeomError::ZeroNormal);
        }
        Ok(Self {
            normal: scale(&normal, 1.0 / len),
            bound: bound / len,
        })
    }

    pub fn normal(&self) -> &[f64] {
        &self.normal
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn dim(&self) -> usize {
        self.normal.len()
    }

    /// `bound - normal·x`; nonnegative inside.
    pub fn slack(&self, x: &[f64]) -> f64 {
        self.bound - dot(&self.normal, x)
    }

    pub fn translated(&self, t: &[f64]) -> Self {
        Self {
            normal: self.normal.clone(),
            bound: self.bound + dot(&self.normal, t),
        }
    }

    pub fn with_bound(&self, bound: f64) -> Self {
        Self {
            normal: self.normal.clone(),
            bound,
        }
    }

    /// The halfspace with the opposite orientation sharing this boundary.
    pub fn flipped(&self) -> Self {
        Self {
            normal: scale(&self.normal, -1.0),
            bound: -self.bound,
        }
    }
}

/// Convex polyhedron as an intersection of halfspaces.
#[derive(Clone, Debug, PartialEq)]
pub struct HPolyhedron {
    dim: usize,
    halfspaces: Vec<Halfspace>,
    empty: bool,
    empty_interior: bool,
    bounded: bool,
}

impl HPolyhedron {
    pub fn new(dim: usize, halfspaces: Vec<Halfspace>) -> Self {
        debug_assert!(halfspaces.iter().all(|h| h.dim() == dim));
        let slack = max_slack(dim, &halfspaces);
        let empty = slack < -EPS_LP;
        let empty_interior = slack <= EPS_GEO;
        let bounded = empty || recession_trivial(dim, &halfspaces);
        Self {
            dim,
            halfspaces,
            empty,
            empty_interior,
            bounded,
        }
    }

    pub fn whole_space(dim: usize) -> Self {
        Self::new(dim, Vec::new())
    }

    /// Builds from raw rows `a·x <= b`. Zero rows that hold everywhere are
    /// dropped; a zero row that fails everywhere makes the set empty.
    pub fn from_rows(dim: usize, rows: Vec<(Vec<f64>, f64)>) -> Result<Self, GeomError> {
        let mut hs = Vec::with_capacity(rows.len());
        let mut contradiction = false;
        for (a, b) in rows {
            if a.len() != dim {
                return Err(GeomError::DimensionMismatch {
                    expected: dim,
                    got: a.len(),
                });
            }
            match Halfspace::new(a, b) {
                Ok(h) => hs.push(h),
                Err(_) if b >= -EPS_LP => {}
                Err(_) => contradiction = true,
            }
        }
        if contradiction {
            hs.extend(empty_rows(dim));
        }
        Ok(Self::new(dim, hs))
    }

    /// Axis-aligned box `[lo, hi]`.
    pub fn from_box(lo: &[f64], hi: &[f64]) -> Self {
        let dim = lo.len();
        let mut hs = Vec::with_capacity(2 * dim);
        for i in 0..dim {
            let mut e = vec![0.0; dim];
            e[i] = 1.0;
            hs.push(Halfspace::new(e.clone(), hi[i]).unwrap());
            e[i] = -1.0;
            hs.push(Halfspace::new(e, -lo[i]).unwrap());
        }
        Self::new(dim, hs)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn halfspaces(&self) -> &[Halfspace] {
        &self.halfspaces
    }

    pub fn len(&self) -> usize {
        self.halfspaces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.empty
    }

    pub fn has_empty_interior(&self) -> bool {
        self.empty_interior
    }

    pub fn is_bounded(&self) -> bool {
        self.bounded
    }

    /// Minimum slack over all rows (`+inf` for the whole space).
    pub fn slack(&self, x: &[f64]) -> f64 {
        self.halfspaces
            .iter()
            .map(|h| h.slack(x))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.slack(x) >= -tol
    }

    /// Largest `s` with `normal·x + s <= bound` for all rows, with its center.
    /// Capped at 1 so the whole space and unbounded sets give a finite answer.
    pub fn chebyshev(&self) -> Option<(Vec<f64>, f64)> {
        chebyshev(self.dim, &self.halfspaces)
    }

    /// `sup_{x in P} u·x`.
    pub fn support(&self, u: &[f64]) -> Result<f64, GeomError> {
        let mut lp = LpProblem::maximize(u.to_vec());
        for h in &self.halfspaces {
            lp.leq(h.normal.clone(), h.bound);
        }
        match lp.solve() {
            LpOutcome::Optimal { value, .. } => Ok(value),
            LpOutcome::Unbounded => Err(GeomError::Unbounded),
            LpOutcome::Infeasible => Err(GeomError::Empty),
        }
    }

    /// Support value with `+inf` for unbounded directions.
    pub fn support_ext(&self, u: &[f64]) -> Result<f64, GeomError> {
        match self.support(u) {
            Err(GeomError::Unbounded) => Ok(f64::INFINITY),
            r => r,
        }
    }

    /// Intersection with another polyhedron (row concatenation, no pruning).
    pub fn intersect(&self, other: &HPolyhedron) -> HPolyhedron {
        let mut hs = self.halfspaces.clone();
        hs.extend(other.halfspaces.iter().cloned());
        HPolyhedron::new(self.dim, hs)
    }

    /// Intersection with `h`; redundant rows are pruned afterwards.
    pub fn clip(&self, h: &Halfspace) -> HPolyhedron {
        let mut hs = self.halfspaces.clone();
        hs.push(h.clone());
        HPolyhedron::new(self.dim, hs).pruned()
    }

    /// Removes rows implied by the others. Empty sets are returned unchanged.
    pub fn pruned(&self) -> HPolyhedron {
        if self.empty {
            return self.clone();
        }
        let mut keep: Vec<bool> = vec![true; self.halfspaces.len()];
        for j in 0..self.halfspaces.len() {
            let mut lp = LpProblem::maximize(self.halfspaces[j].normal.clone());
            for (i, h) in self.halfspaces.iter().enumerate() {
                if i != j && keep[i] {
                    lp.leq(h.normal.clone(), h.bound);
                }
            }
            if let LpOutcome::Optimal { value, .. } = lp.solve() {
                if value <= self.halfspaces[j].bound + EPS_LP {
                    keep[j] = false;
                }
            }
        }
        let hs = self
            .halfspaces
            .iter()
            .zip(&keep)
            .filter(|(_, &k)| k)
            .map(|(h, _)| h.clone())
            .collect();
        HPolyhedron::new(self.dim, hs)
    }

    pub fn translated(&self, t: &[f64]) -> HPolyhedron {
        let hs = self.halfspaces.iter().map(|h| h.translated(t)).collect();
        HPolyhedron::new(self.dim, hs)
    }

    /// `s·P` for `s > 0`.
    pub fn scaled(&self, s: f64) -> HPolyhedron {
        let hs = self
            .halfspaces
            .iter()
            .map(|h| h.with_bound(h.bound * s))
            .collect();
        HPolyhedron::new(self.dim, hs)
    }

    /// `-P`.
    pub fn reflected(&self) -> HPolyhedron {
        let hs = self
            .halfspaces
            .iter()
            .map(|h| Halfspace {
                normal: scale(&h.normal, -1.0),
                bound: h.bound,
            })
            .collect();
        HPolyhedron::new(self.dim, hs)
    }

    /// Axis bounds `(lo, hi)`; errors if the set is empty or unbounded.
    pub fn bounding_box(&self) -> Result<(Vec<f64>, Vec<f64>), GeomError> {
        let mut lo = vec![0.0; self.dim];
        let mut hi = vec![0.0; self.dim];
        for i in 0..self.dim {
            let mut e = vec![0.0; self.dim];
            e[i] = 1.0;
            hi[i] = self.support(&e)?;
            e[i] = -1.0;
            lo[i] = -self.support(&e)?;
        }
        Ok((lo, hi))
    }
}

fn empty_rows(dim: usize) -> [Halfspace; 2] {
    let mut e = vec![0.0; dim];
    e[0] = 1.0;
    let a = Halfspace::new(e.clone(), -1.0).unwrap();
    e[0] = -1.0;
    let b = Halfspace::new(e, -1.0).unwrap();
    [a, b]
}

fn chebyshev(dim: usize, hs: &[Halfspace]) -> Option<(Vec<f64>, f64)> {
    let mut obj = vec![0.0; dim + 1];
    obj[dim] = 1.0;
    let mut lp = LpProblem::maximize(obj.clone());
    for h in hs {
        let mut row = h.normal.clone();
        row.push(1.0);
        lp.leq(row, h.bound);
    }
    lp.leq(obj, 1.0);
    match lp.solve() {
        LpOutcome::Optimal { value, mut point } => {
            point.truncate(dim);
            Some((point, value))
        }
        _ => None,
    }
}

fn max_slack(dim: usize, hs: &[Halfspace]) -> f64 {
    chebyshev(dim, hs).map_or(f64::NEG_INFINITY, |(_, s)| s)
}

/// True iff `{d : normal·d <= 0 for all rows} = {0}`.
fn recession_trivial(dim: usize, hs: &[Halfspace]) -> bool {
    for i in 0..dim {
        for sign in [1.0, -1.0] {
            let mut obj = vec![0.0; dim];
            obj[i] = sign;
            let mut lp = LpProblem::maximize(obj);
            for h in hs {
                lp.leq(h.normal.clone(), 0.0);
            }
            for k in 0..dim {
                let mut e = vec![0.0; dim];
                e[k] = 1.0;
                lp.leq(e.clone(), 1.0);
                e[k] = -1.0;
                lp.leq(e, 1.0);
            }
            match lp.solve() {
                LpOutcome::Optimal { value, .. } if value <= EPS_LP => {}
                _ => return false,
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(lo: f64, hi: f64) -> HPolyhedron {
        HPolyhedron::from_box(&[lo, lo], &[hi, hi])
    }

    #[test]
    fn support_examples() {
        let b = square(-1.0, 1.0);
        assert!((b.support(&[1.0, 0.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!((b.support(&[1.0, 1.0]).unwrap() - 2.0).abs() < 1e-12);
        let tri = HPolyhedron::from_rows(
            2,
            vec![
                (vec![-1.0, 0.0], 0.0),
                (vec![0.0, -1.0], 0.0),
                (vec![1.0, 1.0], 1.0),
            ],
        )
        .unwrap();
        // vertices (0,0), (1,0), (0,1) all give u·x <= 1
        let brute = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]
            .iter()
            .map(|v| v[0] + v[1])
            .fold(f64::MIN, f64::max);
        assert!((tri.support(&[1.0, 1.0]).unwrap() - brute).abs() < 1e-12);
    }

    #[test]
    fn support_errors() {
        let half = HPolyhedron::from_rows(2, vec![(vec![0.0, 1.0], 0.0)]).unwrap();
        assert_eq!(half.support(&[1.0, 0.0]), Err(GeomError::Unbounded));
        let empty =
            HPolyhedron::from_rows(2, vec![(vec![1.0, 0.0], -1.0), (vec![-1.0, 0.0], -1.0)])
                .unwrap();
        assert_eq!(empty.support(&[1.0, 0.0]), Err(GeomError::Empty));
    }

    #[test]
    fn empty_interior_examples() {
        let line =
            HPolyhedron::from_rows(2, vec![(vec![1.0, 0.0], 0.0), (vec![-1.0, 0.0], 0.0)]).unwrap();
        assert!(line.has_empty_interior());
        assert!(!line.is_empty());
        assert!(!square(0.0, 1.0).has_empty_interior());
        let none = HPolyhedron::from_rows(2, vec![(vec![1.0, 0.0], -1.0), (vec![-1.0, 0.0], -1.0)])
            .unwrap();
        assert!(none.has_empty_interior());
        assert!(none.is_empty());
    }

    #[test]
    fn boundedness_flags() {
        assert!(square(0.0, 1.0).is_bounded());
        assert!(!HPolyhedron::whole_space(3).is_bounded());
        let strip =
            HPolyhedron::from_rows(2, vec![(vec![1.0, 0.0], 1.0), (vec![-1.0, 0.0], 1.0)]).unwrap();
        assert!(!strip.is_bounded());
    }

    #[test]
    fn clip_examples() {
        let sq = square(0.0, 1.0);
        let half = sq.clip(&Halfspace::new(vec![1.0, 0.0], 0.5).unwrap());
        assert!((half.support(&[1.0, 0.0]).unwrap() - 0.5).abs() < 1e-12);
        assert!((half.support(&[0.0, 1.0]).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(half.len(), 4);
        // far away row is redundant: row count unchanged
        let same = sq.clip(&Halfspace::new(vec![1.0, 0.0], 2.0).unwrap());
        assert_eq!(same.len(), sq.len());
        // an all-zero row holding everywhere is dropped at construction
        let mut rows: Vec<_> = sq
            .halfspaces()
            .iter()
            .map(|h| (h.normal().to_vec(), h.bound()))
            .collect();
        rows.push((vec![0.0, 0.0], 3.0));
        assert_eq!(HPolyhedron::from_rows(2, rows).unwrap().len(), 4);
    }

    #[test]
    fn zero_normal_rejected() {
        assert_eq!(
            Halfspace::new(vec![0.0, 0.0], 1.0),
            Err(GeomError::ZeroNormal)
        );
    }

    #[test]
    fn reflected_and_scaled() {
        let b = HPolyhedron::from_box(&[0.0, 0.0], &[2.0, 1.0]);
        let r = b.reflected();
        assert!((r.support(&[-1.0, 0.0]).unwrap() - 2.0).abs() < 1e-12);
        let s = b.scaled(3.0);
        assert!((s.support(&[1.0, 0.0]).unwrap() - 6.0).abs() < 1e-12);
    }
}

//! Spherically convex sets on `S^n ⊂ R^{n+1}` given as intersections of caps
//! `{x : n_j·x ≥ c_j}` with `c_j ≥ 0` (each cap at most a hemisphere).

use serde::{Deserialize, Serialize};

use crate::error::NonEuclidError;
use crate::geom::{dot, norm};
use crate::lp::{LpOutcome, LpProblem};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SphericalConvexSet {
    /// Ambient dimension `n + 1`.
    pub ambient: usize,
    pub normals: Vec<Vec<f64>>,
    pub offsets: Vec<f64>,
}

fn unit(v: &[f64]) -> Result<Vec<f64>, NonEuclidError> {
    let l = norm(v);
    if !(l > 1e-300) || !l.is_finite() {
        return Err(NonEuclidError::Invalid("zero or non-finite normal".into()));
    }
    Ok(v.iter().map(|x| x / l).collect())
}

impl SphericalConvexSet {
    pub fn new(
        ambient: usize,
        normals: Vec<Vec<f64>>,
        offsets: Vec<f64>,
    ) -> Result<Self, NonEuclidError> {
        if ambient < 2 {
            return Err(NonEuclidError::Invalid(
                "sphere needs ambient dimension >= 2".into(),
            ));
        }
        if normals.len() != offsets.len() {
            return Err(NonEuclidError::Invalid(
                "normals and offsets differ in length".into(),
            ));
        }
        let mut ns = Vec::with_capacity(normals.len());
        for (n, &c) in normals.iter().zip(&offsets) {
            if n.len() != ambient {
                return Err(NonEuclidError::Invalid("normal has wrong dimension".into()));
            }
            if !(0.0..=1.0).contains(&c) {
                return Err(NonEuclidError::Invalid(format!(
                    "cap offset {c} outside [0, 1]; caps larger than a hemisphere are not convex"
                )));
            }
            ns.push(unit(n)?);
        }
        Ok(Self {
            ambient,
            normals: ns,
            offsets,
        })
    }

    pub fn whole(ambient: usize) -> Self {
        Self {
            ambient,
            normals: vec![],
            offsets: vec![],
        }
    }

    pub fn hemisphere(normal: Vec<f64>) -> Result<Self, NonEuclidError> {
        let d = normal.len();
        Self::new(d, vec![normal], vec![0.0])
    }

    /// Closed cap of angular radius `r ≤ π/2` about `center`.
    pub fn cap(center: Vec<f64>, r: f64) -> Result<Self, NonEuclidError> {
        let d = center.len();
        Self::new(d, vec![center], vec![r.cos().max(0.0)])
    }

    /// Lune on `S^2` of dihedral angle `alpha ∈ (0, π]` bisected by the `x` axis
    /// and with edge along the `z` axis.
    pub fn lune(alpha: f64) -> Result<Self, NonEuclidError> {
        let h = 0.5 * alpha;
        // normals perpendicular to the two bounding great half-circles
        let n0 = vec![h.sin(), h.cos(), 0.0];
        let n1 = vec![h.sin(), -h.cos(), 0.0];
        Self::new(3, vec![n0, n1], vec![0.0, 0.0])
    }

    /// Spherical triangle on `S^2` with the given vertices.
    pub fn triangle(v: [[f64; 3]; 3]) -> Result<Self, NonEuclidError> {
        let mut normals = Vec::new();
        for i in 0..3 {
            let (a, b, c) = (v[(i + 1) % 3], v[(i + 2) % 3], v[i]);
            let mut n = vec![
                a[1] * b[2] - a[2] * b[1],
                a[2] * b[0] - a[0] * b[2],
                a[0] * b[1] - a[1] * b[0],
            ];
            if dot(&n, &c) < 0.0 {
                n.iter_mut().for_each(|x| *x = -*x);
            }
            normals.push(n);
        }
        Self::new(3, normals, vec![0.0; 3])
    }

    pub fn len(&self) -> usize {
        self.normals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.normals.is_empty()
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.normals
            .iter()
            .zip(&self.offsets)
            .all(|(n, c)| dot(n, x) >= c - tol)
    }

    /// Angular distance from a unit `x` inside the set to its boundary (negative outside).
    pub fn depth(&self, x: &[f64]) -> f64 {
        self.normals
            .iter()
            .zip(&self.offsets)
            .map(|(n, c)| c.acos() - dot(n, x).clamp(-1.0, 1.0).acos())
            .fold(std::f64::consts::PI, f64::min)
    }

    /// Applies an orthogonal map given by its rows.
    pub fn rotated(&self, q: &[Vec<f64>]) -> Self {
        let normals = self
            .normals
            .iter()
            .map(|n| q.iter().map(|row| dot(row, n)).collect())
            .collect();
        Self {
            ambient: self.ambient,
            normals,
            offsets: self.offsets.clone(),
        }
    }
}

/// Finite point set on the sphere with a neighbourhood radius.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SphericalPointSet {
    pub points: Vec<Vec<f64>>,
    pub eps: f64,
}

impl SphericalPointSet {
    pub fn new(points: Vec<Vec<f64>>, eps: f64) -> Result<Self, NonEuclidError> {
        let Some(d) = points.first().map(|p| p.len()) else {
            return Err(NonEuclidError::Empty);
        };
        if !(eps > 0.0 && eps < std::f64::consts::FRAC_PI_2) {
            return Err(NonEuclidError::Invalid(format!(
                "eps {eps} outside (0, π/2)"
            )));
        }
        let mut ps = Vec::with_capacity(points.len());
        for p in &points {
            if p.len() != d {
                return Err(NonEuclidError::Invalid("mixed point dimensions".into()));
            }
            ps.push(unit(p)?);
        }
        Ok(Self { points: ps, eps })
    }

    pub fn ambient(&self) -> usize {
        self.points[0].len()
    }

    /// Largest `s` with `v·x ≥ s` for all points over `v ∈ [-1,1]^{n+1}`; the set
    /// lies in an open hemisphere exactly when this is positive.
    pub fn hemisphere_margin(&self) -> f64 {
        let d = self.ambient();
        let mut obj = vec![0.0; d + 1];
        obj[d] = 1.0;
        let mut lp = LpProblem::maximize(obj);
        for p in &self.points {
            let mut row: Vec<f64> = p.iter().map(|x| -x).collect();
            row.push(1.0);
            lp.leq(row, 0.0);
        }
        for i in 0..d {
            let mut e = vec![0.0; d + 1];
            e[i] = 1.0;
            lp.leq(e.clone(), 1.0);
            e[i] = -1.0;
            lp.leq(e, 1.0);
        }
        match lp.solve() {
            LpOutcome::Optimal { value, .. } => value,
            _ => 0.0,
        }
    }
}

const KELLEY_MAX: usize = 400;
const BISECT_STEPS: usize = 80;

/// A unit point in every cap `{n_j·x ≥ b_j}` (all `b_j ≥ 0`), if one exists.
fn caps_meet(normals: &[Vec<f64>], bounds: &[f64]) -> Option<Vec<f64>> {
    // max s  s.t.  n_j·x - s ≥ b_j,  |x| ≤ 1 (outer-approximated by cuts)
    let d = normals[0].len();
    let mut cuts: Vec<Vec<f64>> = Vec::new();
    for _ in 0..KELLEY_MAX {
        let mut obj = vec![0.0; d + 1];
        obj[d] = 1.0;
        let mut lp = LpProblem::maximize(obj);
        for (n, &b) in normals.iter().zip(bounds) {
            let mut row: Vec<f64> = n.iter().map(|x| -x).collect();
            row.push(1.0);
            lp.leq(row, -b);
        }
        for i in 0..d {
            let mut e = vec![0.0; d + 1];
            e[i] = 1.0;
            lp.leq(e.clone(), 1.0);
            e[i] = -1.0;
            lp.leq(e, 1.0);
        }
        for c in &cuts {
            let mut row = c.clone();
            row.push(0.0);
            lp.leq(row, 1.0);
        }
        let LpOutcome::Optimal { value: ub, point } = lp.solve() else {
            return None;
        };
        if ub < -1e-14 {
            return None;
        }
        let x = &point[..d];
        let l = norm(x);
        if l <= 1e-300 {
            // only reachable with all bounds zero and no interior direction
            return None;
        }
        let xs: Vec<f64> = x.iter().map(|v| v / l.max(1.0)).collect();
        let lb = normals
            .iter()
            .zip(bounds)
            .map(|(n, b)| dot(n, &xs) - b)
            .fold(f64::INFINITY, f64::min);
        if lb >= -1e-15 {
            let u: Vec<f64> = xs.iter().map(|v| v / norm(&xs)).collect();
            return Some(u);
        }
        if ub - lb < 1e-14 {
            return None;
        }
        cuts.push(x.iter().map(|v| v / l).collect());
    }
    None
}

/// Angular radius of the largest cap inside `k` and its centre.
pub fn spherical_inradius(k: &SphericalConvexSet) -> Result<(f64, Vec<f64>), NonEuclidError> {
    let pi = std::f64::consts::PI;
    if k.is_empty() {
        let mut c = vec![0.0; k.ambient];
        c[k.ambient - 1] = 1.0;
        return Ok((pi, c));
    }
    if k.len() == 1 {
        return Ok((k.offsets[0].acos(), k.normals[0].clone()));
    }
    let radii: Vec<f64> = k.offsets.iter().map(|c| c.acos()).collect();
    let bounds_at = |t: f64| -> Vec<f64> { radii.iter().map(|r| (r - t).cos()).collect() };
    let Some(mut center) = caps_meet(&k.normals, &bounds_at(0.0)) else {
        return Err(NonEuclidError::Empty);
    };
    let (mut lo, mut hi) = (0.0, radii.iter().cloned().fold(f64::INFINITY, f64::min));
    for _ in 0..BISECT_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match caps_meet(&k.normals, &bounds_at(mid)) {
            Some(c) => {
                lo = mid;
                center = c;
            }
            None => hi = mid,
        }
    }
    // report the depth actually attained at the centre
    Ok((k.depth(&center).max(0.0), center))
}

/// Measure of the unit sphere `S^n`.
pub fn sphere_measure(n: usize) -> f64 {
    let pi = std::f64::consts::PI;
    match n {
        0 => 2.0,
        1 => 2.0 * pi,
        _ => 2.0 * pi / (n as f64 - 1.0) * sphere_measure(n - 2),
    }
}

/// Fraction of `S^n` covered by a cap of angular radius `r`.
pub fn cap_fraction(n: usize, r: f64) -> f64 {
    let pi = std::f64::consts::PI;
    let r = r.clamp(0.0, pi);
    match n {
        1 => r / pi,
        2 => 0.5 * (1.0 - r.cos()),
        3 => (r - r.sin() * r.cos()) / pi,
        _ => {
            // ∫_0^r sin^{n-1} / ∫_0^π sin^{n-1}, composite Simpson
            let f = |t: f64| t.sin().powi(n as i32 - 1);
            let simpson = |a: f64, b: f64| {
                let m = 2000;
                let h = (b - a) / m as f64;
                let mut s = f(a) + f(b);
                for i in 1..m {
                    s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
                }
                s * h / 3.0
            };
            simpson(0.0, r) / simpson(0.0, pi)
        }
    }
}

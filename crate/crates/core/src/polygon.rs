//! Planar convex polygons in vertex form, used for 2D algorithms and rendering.

use serde::{Deserialize, Serialize};

use crate::error::GeomError;
use crate::geom::{HPolyhedron, Halfspace, EPS_GEO};

pub type Point2 = [f64; 2];

#[inline]
pub fn cross(a: Point2, b: Point2) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
pub fn sub2(a: Point2, b: Point2) -> Point2 {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub fn add2(a: Point2, b: Point2) -> Point2 {
    [a[0] + b[0], a[1] + b[1]]
}

#[inline]
pub fn scale2(a: Point2, s: f64) -> Point2 {
    [a[0] * s, a[1] * s]
}

#[inline]
pub fn dot2(a: Point2, b: Point2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn dist2(a: Point2, b: Point2) -> f64 {
    let d = sub2(a, b);
    dot2(d, d).sqrt()
}

/// Orientation of `c` relative to the directed line `a -> b` (positive = left).
#[inline]
pub fn orient(a: Point2, b: Point2, c: Point2) -> f64 {
    cross(sub2(b, a), sub2(c, a))
}

pub fn point_segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let ab = sub2(b, a);
    let len2 = dot2(ab, ab);
    if len2 == 0.0 {
        return dist2(p, a);
    }
    let t = (dot2(sub2(p, a), ab) / len2).clamp(0.0, 1.0);
    dist2(p, add2(a, scale2(ab, t)))
}

/// Axis-aligned rectangle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min: Point2,
    pub max: Point2,
}

impl Rect {
    pub fn new(min: Point2, max: Point2) -> Self {
        Self { min, max }
    }

    pub fn square(half: f64) -> Self {
        Self::new([-half, -half], [half, half])
    }

    pub fn around(points: &[Point2]) -> Self {
        let mut r = Rect::new([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in points {
            for (k, &x) in p.iter().enumerate() {
                r.min[k] = r.min[k].min(x);
                r.max[k] = r.max[k].max(x);
            }
        }
        r
    }

    pub fn inflated(&self, margin: f64) -> Self {
        Self::new(
            [self.min[0] - margin, self.min[1] - margin],
            [self.max[0] + margin, self.max[1] + margin],
        )
    }

    pub fn width(&self) -> f64 {
        self.max[0] - self.min[0]
    }

    pub fn height(&self) -> f64 {
        self.max[1] - self.min[1]
    }

    pub fn corners(&self) -> [Point2; 4] {
        [
            self.min,
            [self.max[0], self.min[1]],
            self.max,
            [self.min[0], self.max[1]],
        ]
    }

    pub fn on_boundary(&self, p: Point2, tol: f64) -> bool {
        (p[0] - self.min[0]).abs() <= tol
            || (p[0] - self.max[0]).abs() <= tol
            || (p[1] - self.min[1]).abs() <= tol
            || (p[1] - self.max[1]).abs() <= tol
    }

    /// Both points lie on the same side of the rectangle.
    pub fn on_same_side(&self, p: Point2, q: Point2, tol: f64) -> bool {
        (0..2).any(|k| {
            ((p[k] - self.min[k]).abs() <= tol && (q[k] - self.min[k]).abs() <= tol)
                || ((p[k] - self.max[k]).abs() <= tol && (q[k] - self.max[k]).abs() <= tol)
        })
    }

    pub fn to_hpolyhedron(&self) -> HPolyhedron {
        HPolyhedron::from_box(&self.min, &self.max)
    }
}

/// Strictly convex polygon with counter-clockwise vertices.
///
/// `truncated[i]` marks vertices created by a bounding box rather than by the
/// set itself.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolygonV {
    vertices: Vec<Point2>,
    #[serde(default)]
    truncated: Vec<bool>,
}

impl PolygonV {
    /// Validates a strictly convex CCW traversal (near-duplicate and collinear
    /// vertices are removed first).
    pub fn new(vertices: Vec<Point2>) -> Result<Self, GeomError> {
        let vertices = clean_ring(vertices, 1e-12);
        if vertices.len() < 3 || !is_convex_ccw(&vertices, 0.0) {
            return Err(GeomError::NotConvex);
        }
        let truncated = vec![false; vertices.len()];
        Ok(Self {
            vertices,
            truncated,
        })
    }

    /// Convex hull of arbitrary points.
    pub fn hull_of(points: &[Point2]) -> Result<Self, GeomError> {
        Self::new(convex_hull(points))
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn truncated(&self) -> &[bool] {
        &self.truncated
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point2, Point2)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn centroid(&self) -> Point2 {
        let mut cx = 0.0;
        let mut cy = 0.0;
        let mut a = 0.0;
        for (p, q) in self.edges() {
            let c = cross(p, q);
            a += c;
            cx += (p[0] + q[0]) * c;
            cy += (p[1] + q[1]) * c;
        }
        [cx / (3.0 * a), cy / (3.0 * a)]
    }

    pub fn bounds(&self) -> Rect {
        Rect::around(&self.vertices)
    }

    /// Minimum signed distance to the edge lines; positive inside.
    pub fn depth(&self, p: Point2) -> f64 {
        self.edges()
            .map(|(a, b)| orient(a, b, p) / dist2(a, b))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, p: Point2, tol: f64) -> bool {
        self.depth(p) >= -tol
    }

    /// Euclidean distance from `p` to the polygon (0 inside).
    pub fn distance_to(&self, p: Point2) -> f64 {
        if self.depth(p) >= 0.0 {
            return 0.0;
        }
        self.edges()
            .map(|(a, b)| point_segment_distance(p, a, b))
            .fold(f64::INFINITY, f64::min)
    }

    /// H-representation with one row per edge.
    pub fn to_hpolyhedron(&self) -> HPolyhedron {
        let hs = self.edges().map(|(a, b)| edge_halfspace(a, b)).collect();
        HPolyhedron::new(2, hs)
    }

    pub fn translated(&self, t: Point2) -> Self {
        Self {
            vertices: self.vertices.iter().map(|&v| add2(v, t)).collect(),
            truncated: self.truncated.clone(),
        }
    }
}

/// Outward halfspace of the CCW edge `a -> b`.
pub fn edge_halfspace(a: Point2, b: Point2) -> Halfspace {
    let d = sub2(b, a);
    let n = vec![d[1], -d[0]];
    let bound = n[0] * a[0] + n[1] * a[1];
    Halfspace::new(n, bound).expect("degenerate polygon edge")
}

pub fn signed_area(ring: &[Point2]) -> f64 {
    let n = ring.len();
    (0..n)
        .map(|i| cross(ring[i], ring[(i + 1) % n]))
        .sum::<f64>()
        * 0.5
}

pub fn is_convex_ccw(ring: &[Point2], tol: f64) -> bool {
    let n = ring.len();
    if n < 3 {
        return false;
    }
    (0..n).all(|i| orient(ring[i], ring[(i + 1) % n], ring[(i + 2) % n]) > -tol)
        && signed_area(ring) > 0.0
}

/// Drops consecutive near-duplicates and collinear middle vertices.
fn clean_ring(mut ring: Vec<Point2>, tol: f64) -> Vec<Point2> {
    let scale = ring
        .iter()
        .flat_map(|p| p.iter())
        .fold(1.0f64, |m, v| m.max(v.abs()));
    let tol = tol * scale;
    loop {
        let n = ring.len();
        if n < 3 {
            return ring;
        }
        let mut removed = false;
        for i in 0..n {
            let prev = ring[(i + n - 1) % n];
            let cur = ring[i];
            let next = ring[(i + 1) % n];
            let dup = dist2(prev, cur) <= tol;
            let len = dist2(prev, next);
            let collinear = len > 0.0
                && (orient(prev, next, cur) / len).abs() <= tol
                && dot2(sub2(cur, prev), sub2(next, cur)) >= 0.0;
            if dup || collinear {
                ring.remove(i);
                removed = true;
                break;
            }
        }
        if !removed {
            return ring;
        }
    }
}

/// Andrew's monotone chain; CCW, no collinear points.
pub fn convex_hull(points: &[Point2]) -> Vec<Point2> {
    let mut pts: Vec<Point2> = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let scale = pts
        .iter()
        .flat_map(|p| p.iter())
        .fold(1.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-14 * scale * scale;
    let mut hull: Vec<Point2> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Point2>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2
                && orient(hull[hull.len() - 2], hull[hull.len() - 1], p) <= tol
            {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

/// Vertices of `P ∩ bounds` in CCW order; vertices lying on the box boundary
/// are flagged as truncation artifacts.
pub fn polygon_from_hrep(p: &HPolyhedron, bounds: &Rect) -> Result<PolygonV, GeomError> {
    if p.dim() != 2 {
        return Err(GeomError::RequiresDimension(2));
    }
    let mut ring: Vec<Point2> = bounds.corners().to_vec();
    for h in p.halfspaces() {
        ring = clip_ring(&ring, h);
        if ring.is_empty() {
            return Err(GeomError::EmptyIntersection);
        }
    }
    let ring = clean_ring(ring, 1e-12);
    if ring.len() < 3 || signed_area(&ring) <= EPS_GEO * EPS_GEO {
        return Err(GeomError::EmptyIntersection);
    }
    let tol = 1e-9 * (1.0 + bounds.width().max(bounds.height()));
    let truncated = ring.iter().map(|&v| bounds.on_boundary(v, tol)).collect();
    Ok(PolygonV {
        vertices: ring,
        truncated,
    })
}

/// Sutherland–Hodgman step against a single halfspace.
fn clip_ring(ring: &[Point2], h: &Halfspace) -> Vec<Point2> {
    let n = [h.normal()[0], h.normal()[1]];
    let b = h.bound();
    let val = |p: Point2| dot2(n, p) - b;
    let mut out = Vec::with_capacity(ring.len() + 1);
    let m = ring.len();
    for i in 0..m {
        let cur = ring[i];
        let next = ring[(i + 1) % m];
        let vc = val(cur);
        let vn = val(next);
        if vc <= 0.0 {
            out.push(cur);
        }
        if (vc < 0.0 && vn > 0.0) || (vc > 0.0 && vn < 0.0) {
            let t = vc / (vc - vn);
            out.push(add2(cur, scale2(sub2(next, cur), t)));
        }
    }
    out
}

/// Exact Hausdorff distance between convex polygons (attained at vertices).
pub fn hausdorff(a: &PolygonV, b: &PolygonV) -> f64 {
    let ab = a
        .vertices()
        .iter()
        .map(|&v| b.distance_to(v))
        .fold(0.0, f64::max);
    let ba = b
        .vertices()
        .iter()
        .map(|&v| a.distance_to(v))
        .fold(0.0, f64::max);
    ab.max(ba)
}

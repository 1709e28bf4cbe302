//! Extension of a convex partition of a convex polygon `B` to a convex
//! partition of the whole plane.
//!
//! Pipeline: [`boundary_graph`] finds the points `a_1 … a_n` where ownership
//! of `∂B` changes, [`initial_rays`] shoots a ray from each `a_i` along the
//! internal edge of the cell that continues past it, [`erase_rays`] removes
//! transversal crossings nearest to `A = conv{a_i}` first, and
//! [`extend_partition`] glues each exterior face onto the cell owning its arc.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::ExtendError;
use crate::geom::{HPolyhedron, EPS_GEO};
use crate::partition::{Ambient, CellSet};
use crate::polygon::{
    add2, convex_hull, cross, dist2, dot2, edge_halfspace, point_segment_distance,
    polygon_from_hrep, scale2, signed_area, sub2, Point2, PolygonV, Rect,
};

/// Cyclic structure of ownership changes along `∂B`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryGraph {
    /// `a_1 … a_n`, counter-clockwise along `∂B`.
    pub vertices: Vec<Point2>,
    /// Arclength position of each vertex, measured from `B`'s first vertex.
    pub positions: Vec<f64>,
    /// `owners[i]` owns the arc from `a_i` to `a_{i+1}`.
    pub owners: Vec<usize>,
    /// Corners of `B` strictly inside each arc, in traversal order.
    pub corners: Vec<Vec<Point2>>,
    pub perimeter: f64,
    /// The cell owning all of `∂B` when `n = 0`.
    pub sole_owner: Option<usize>,
}

impl BoundaryGraph {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Arc indices owned by `cell`.
    pub fn arcs_of(&self, cell: usize) -> Vec<usize> {
        (0..self.owners.len())
            .filter(|&i| self.owners[i] == cell)
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RayStatus {
    Full,
    Trimmed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ray {
    pub origin: Point2,
    /// Unit direction, pointing out of `B`.
    pub dir: Point2,
    /// `+inf` for a full ray, otherwise the length of the surviving segment.
    #[serde(with = "crate::serde_ext::float")]
    pub length: f64,
}

impl Ray {
    pub fn status(&self) -> RayStatus {
        if self.length.is_finite() {
            RayStatus::Trimmed
        } else {
            RayStatus::Full
        }
    }

    pub fn at(&self, s: f64) -> Point2 {
        add2(self.origin, scale2(self.dir, s))
    }

    pub fn end(&self) -> Option<Point2> {
        self.length.is_finite().then(|| self.at(self.length))
    }
}

/// One erasing step: `trimmed` now stops at `point` on ray `other`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trim {
    pub trimmed: usize,
    pub other: usize,
    pub point: Point2,
    /// Distance from `point` to `A`.
    pub distance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RaySystem {
    pub rays: Vec<Ray>,
    pub trims: Vec<Trim>,
    /// Per arc `i`: turn from `ℓ_{i+1}` into the owner's next internal edge
    /// at `a_{i+1}`; non-negative means the owner plus its exterior wedge is
    /// convex there (the turn at `a_i` is straight by construction).
    pub certificates: Vec<f64>,
}

impl RaySystem {
    pub fn len(&self) -> usize {
        self.rays.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rays.is_empty()
    }
}

/// Everything produced while extending one partition.
#[derive(Clone, Debug)]
pub struct Extension {
    pub graph: BoundaryGraph,
    pub initial: RaySystem,
    pub rays: RaySystem,
    /// Exterior face of each arc, clipped to `frame`.
    pub faces: Vec<Vec<Point2>>,
    /// Working frame containing `B`, all anchors and all initial crossings.
    pub frame: Rect,
    pub cells: CellSet,
}

fn scale_of(b: &PolygonV) -> f64 {
    let r = b.bounds();
    r.width().max(r.height()).max(1.0)
}

/// Cell polygons `C_j ∩ B`; `None` for cells with empty interior.
fn cell_polygons(b: &PolygonV, cells: &CellSet) -> Result<Vec<Option<PolygonV>>, ExtendError> {
    if cells.dim() != 2 {
        return Err(crate::error::GeomError::RequiresDimension(2).into());
    }
    let frame = b.bounds().inflated(1.0);
    let bh = b.to_hpolyhedron();
    Ok(cells
        .cells()
        .iter()
        .map(|c| {
            if c.has_empty_interior() {
                return None;
            }
            polygon_from_hrep(&c.intersect(&bh), &frame).ok()
        })
        .collect())
}

struct Perimeter {
    verts: Vec<Point2>,
    starts: Vec<f64>,
    total: f64,
}

impl Perimeter {
    fn new(b: &PolygonV) -> Self {
        let verts = b.vertices().to_vec();
        let mut starts = Vec::with_capacity(verts.len());
        let mut s = 0.0;
        for (p, q) in b.edges() {
            starts.push(s);
            s += dist2(p, q);
        }
        Self {
            verts,
            starts,
            total: s,
        }
    }

    fn edge(&self, k: usize) -> (Point2, Point2) {
        let m = self.verts.len();
        (self.verts[k], self.verts[(k + 1) % m])
    }

    fn point_at(&self, s: f64) -> Point2 {
        let s = s.rem_euclid(self.total);
        let k = self.starts.iter().rposition(|&t| t <= s).unwrap_or(0);
        let (p, q) = self.edge(k);
        let len = dist2(p, q);
        add2(p, scale2(sub2(q, p), (s - self.starts[k]) / len))
    }

    /// `B` edge index and parameter if segment `p -> q` runs along `∂B`
    /// in the counter-clockwise direction.
    fn locate(&self, p: Point2, q: Point2, tol: f64) -> Option<(f64, f64)> {
        for k in 0..self.verts.len() {
            let (u, v) = self.edge(k);
            let len = dist2(u, v);
            let d = scale2(sub2(v, u), 1.0 / len);
            let off = |x: Point2| cross(d, sub2(x, u)).abs();
            if off(p) > tol || off(q) > tol {
                continue;
            }
            let tp = dot2(d, sub2(p, u));
            let tq = dot2(d, sub2(q, u));
            if tp >= -tol && tq <= len + tol && tq > tp + tol {
                let s0 = self.starts[k];
                return Some((s0 + tp.clamp(0.0, len), s0 + tq.clamp(0.0, len)));
            }
        }
        None
    }

    /// Outward unit normals of the `B` edges incident to the point at `s`.
    fn normals_at(&self, s: f64, tol: f64) -> Vec<Point2> {
        let m = self.verts.len();
        let normal = |k: usize| {
            let (u, v) = self.edge(k);
            let d = sub2(v, u);
            let l = dist2(u, v);
            [d[1] / l, -d[0] / l]
        };
        let s = s.rem_euclid(self.total);
        for k in 0..m {
            let at_start =
                (s - self.starts[k]).abs() <= tol || (k == 0 && (s - self.total).abs() <= tol);
            if at_start {
                return vec![normal((k + m - 1) % m), normal(k)];
            }
        }
        let k = self.starts.iter().rposition(|&t| t <= s).unwrap_or(0);
        vec![normal(k)]
    }
}

/// Ownership changes along `∂B`.
pub fn boundary_graph(b: &PolygonV, cells: &CellSet) -> Result<BoundaryGraph, ExtendError> {
    let polys = cell_polygons(b, cells)?;
    graph_from_polygons(b, &polys)
}

fn graph_from_polygons(
    b: &PolygonV,
    polys: &[Option<PolygonV>],
) -> Result<BoundaryGraph, ExtendError> {
    let per = Perimeter::new(b);
    let tol = EPS_GEO * scale_of(b);
    let mut pieces: Vec<(f64, f64, usize)> = Vec::new();
    for (j, poly) in polys.iter().enumerate() {
        let Some(poly) = poly else { continue };
        for (p, q) in poly.edges() {
            if let Some((s0, s1)) = per.locate(p, q, tol) {
                pieces.push((s0, s1, j));
            }
        }
    }
    pieces.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));

    let mut cursor = 0.0;
    for &(s0, s1, j) in &pieces {
        if s0 > cursor + tol {
            return Err(ExtendError::InconsistentPartition {
                at: cursor,
                detail: "boundary not covered by any cell".into(),
            });
        }
        if s0 < cursor - tol {
            return Err(ExtendError::InconsistentPartition {
                at: s0,
                detail: format!("cell {j} overlaps another cell on the boundary"),
            });
        }
        cursor = cursor.max(s1);
    }
    if (cursor - per.total).abs() > tol {
        return Err(ExtendError::InconsistentPartition {
            at: cursor,
            detail: "boundary not covered by any cell".into(),
        });
    }

    let p = pieces.len();
    let changes: Vec<usize> = (0..p)
        .filter(|&c| pieces[c].2 != pieces[(c + p - 1) % p].2)
        .collect();
    if changes.is_empty() {
        return Ok(BoundaryGraph {
            vertices: vec![],
            positions: vec![],
            owners: vec![],
            corners: vec![],
            perimeter: per.total,
            sole_owner: pieces.first().map(|x| x.2),
        });
    }
    let positions: Vec<f64> = changes.iter().map(|&c| pieces[c].0).collect();
    let vertices = positions.iter().map(|&s| per.point_at(s)).collect();
    let owners = changes.iter().map(|&c| pieces[c].2).collect();
    let n = positions.len();
    let corners = (0..n)
        .map(|i| {
            let start = positions[i];
            let end = if i + 1 < n {
                positions[i + 1]
            } else {
                positions[0] + per.total
            };
            let mut inside: Vec<(f64, Point2)> = Vec::new();
            for (k, &s) in per.starts.iter().enumerate() {
                for s in [s, s + per.total] {
                    if s > start + tol && s < end - tol {
                        inside.push((s, per.verts[k]));
                    }
                }
            }
            inside.sort_by(|a, b| a.0.total_cmp(&b.0));
            inside.into_iter().map(|x| x.1).collect()
        })
        .collect();
    Ok(BoundaryGraph {
        vertices,
        positions,
        owners,
        corners,
        perimeter: per.total,
        sole_owner: None,
    })
}

fn nearest_vertex(poly: &PolygonV, p: Point2, tol: f64) -> Option<usize> {
    let (idx, d) = poly
        .vertices()
        .iter()
        .enumerate()
        .map(|(i, &v)| (i, dist2(v, p)))
        .min_by(|a, b| a.1.total_cmp(&b.1))?;
    (d <= tol).then_some(idx)
}

fn unit(v: Point2) -> Point2 {
    let l = (v[0] * v[0] + v[1] * v[1]).sqrt();
    [v[0] / l, v[1] / l]
}

/// One ray per boundary vertex, extending the internal edge of the cell whose
/// boundary continues past it.
pub fn initial_rays(
    b: &PolygonV,
    graph: &BoundaryGraph,
    cells: &CellSet,
) -> Result<RaySystem, ExtendError> {
    let polys = cell_polygons(b, cells)?;
    rays_from_polygons(b, graph, &polys)
}

fn rays_from_polygons(
    b: &PolygonV,
    graph: &BoundaryGraph,
    polys: &[Option<PolygonV>],
) -> Result<RaySystem, ExtendError> {
    let per = Perimeter::new(b);
    let tol = EPS_GEO * scale_of(b);
    let n = graph.len();
    let vertex_of = |cell: usize, p: Point2| -> Result<(&PolygonV, usize), ExtendError> {
        let poly = polys[cell].as_ref().ok_or_else(|| {
            ExtendError::Contract(format!("cell {cell} owns an arc but is empty"))
        })?;
        let v = nearest_vertex(poly, p, 10.0 * tol).ok_or_else(|| {
            ExtendError::InconsistentPartition {
                at: 0.0,
                detail: format!(
                    "boundary vertex ({:.6}, {:.6}) is not a corner of cell {cell}",
                    p[0], p[1]
                ),
            }
        })?;
        Ok((poly, v))
    };

    let mut rays = Vec::with_capacity(n);
    for i in 0..n {
        let a = graph.vertices[i];
        let (poly, v) = vertex_of(graph.owners[i], a)?;
        let m = poly.len();
        let prev = poly.vertices()[(v + m - 1) % m];
        let dir = unit(sub2(a, prev));
        let outward = per
            .normals_at(graph.positions[i], tol)
            .iter()
            .map(|&nrm| dot2(nrm, dir))
            .fold(f64::NEG_INFINITY, f64::max);
        if !(outward > 1e-9) {
            return Err(ExtendError::NoValidDirection { vertex: i });
        }
        rays.push(Ray {
            origin: a,
            dir,
            length: f64::INFINITY,
        });
    }

    let mut certificates = Vec::with_capacity(n);
    for i in 0..n {
        let next = (i + 1) % n;
        let a = graph.vertices[next];
        let (poly, v) = vertex_of(graph.owners[i], a)?;
        let after = poly.vertices()[(v + 1) % poly.len()];
        let e = unit(sub2(after, a));
        let cert = cross(scale2(rays[next].dir, -1.0), e);
        if cert < -EPS_GEO {
            return Err(ExtendError::Contract(format!(
                "arc {i}: owner plus exterior wedge is not convex (turn {cert:.3e})"
            )));
        }
        certificates.push(cert);
    }
    Ok(RaySystem {
        rays,
        trims: vec![],
        certificates,
    })
}

/// Distance from `p` to the convex hull given by CCW `hull` (any size >= 1).
fn distance_to_hull(hull: &[Point2], p: Point2) -> f64 {
    match hull.len() {
        0 => f64::INFINITY,
        1 => dist2(hull[0], p),
        m => {
            if m >= 3
                && (0..m).all(|i| cross(sub2(hull[(i + 1) % m], hull[i]), sub2(p, hull[i])) >= 0.0)
            {
                return 0.0;
            }
            (0..m)
                .map(|i| point_segment_distance(p, hull[i], hull[(i + 1) % m]))
                .fold(f64::INFINITY, f64::min)
        }
    }
}

/// Transversal crossing of two (possibly trimmed) rays, as parameters `(s, t)`.
fn crossing(r: &Ray, q: &Ray, tol: f64) -> Option<(f64, f64)> {
    let den = cross(r.dir, q.dir);
    if den.abs() <= 1e-12 {
        return None;
    }
    let w = sub2(q.origin, r.origin);
    let s = cross(w, q.dir) / den;
    let t = cross(w, r.dir) / den;
    (s > tol && t > tol && s < r.length - tol && t < q.length - tol).then_some((s, t))
}

/// All remaining transversal crossings as `(i, j, s, t)`.
pub fn crossings(rays: &RaySystem) -> Vec<(usize, usize, f64, f64)> {
    let tol = 1e-9 * ray_scale(&rays.rays);
    let mut out = Vec::new();
    for i in 0..rays.len() {
        for j in i + 1..rays.len() {
            if let Some((s, t)) = crossing(&rays.rays[i], &rays.rays[j], tol) {
                out.push((i, j, s, t));
            }
        }
    }
    out
}

fn ray_scale(rays: &[Ray]) -> f64 {
    rays.iter()
        .flat_map(|r| r.origin)
        .fold(1.0f64, |m, v| m.max(v.abs()))
}

/// Repeatedly trims at the transversal crossing nearest to `A` until no
/// crossings remain. The ray with the shorter surviving segment is trimmed
/// (ties: smaller index); equidistant crossings are taken in index order.
pub fn erase_rays(rays: &RaySystem) -> Result<RaySystem, ExtendError> {
    let mut out = rays.clone();
    let anchors: Vec<Point2> = out.rays.iter().map(|r| r.origin).collect();
    let hull = convex_hull(&anchors);
    let n = out.len();
    let cap = n * n + 1;
    for _ in 0..cap {
        let best = crossings(&out)
            .into_iter()
            .map(|(i, j, s, t)| {
                let p = out.rays[i].at(s);
                (distance_to_hull(&hull, p), i, j, s, t, p)
            })
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let Some((distance, i, j, s, t, point)) = best else {
            return Ok(out);
        };
        let (trimmed, other, len) = if t < s { (j, i, t) } else { (i, j, s) };
        out.rays[trimmed].length = len;
        out.trims.push(Trim {
            trimmed,
            other,
            point,
            distance,
        });
    }
    if crossings(&out).is_empty() {
        Ok(out)
    } else {
        Err(ExtendError::NonTermination(cap))
    }
}

/// Pairwise interior-disjointness (LP) and area balance of `C_j ∩ B`.
pub fn validate_partition(b: &PolygonV, cells: &CellSet) -> Result<(), ExtendError> {
    let polys = cell_polygons(b, cells)?;
    validate_polygons(b, cells, &polys)
}

fn validate_polygons(
    b: &PolygonV,
    cells: &CellSet,
    polys: &[Option<PolygonV>],
) -> Result<(), ExtendError> {
    let area: f64 = polys.iter().flatten().map(|p| p.area()).sum();
    let target = b.area();
    if (area - target).abs() > 1e-6 * target.max(1.0) {
        return Err(ExtendError::InconsistentPartition {
            at: 0.0,
            detail: format!("cell areas sum to {area:.9}, body area is {target:.9}"),
        });
    }
    let bh = b.to_hpolyhedron();
    for i in 0..polys.len() {
        for j in i + 1..polys.len() {
            if polys[i].is_none() || polys[j].is_none() {
                continue;
            }
            let both = cells.cell(i).intersect(cells.cell(j)).intersect(&bh);
            if !both.has_empty_interior() {
                return Err(ExtendError::InconsistentPartition {
                    at: 0.0,
                    detail: format!("cells {i} and {j} overlap"),
                });
            }
        }
    }
    Ok(())
}

/// Extends a partition of `B` to a partition of the plane with `V_i ∩ B = C_i`.
pub fn extend_partition(b: &PolygonV, cells: &CellSet) -> Result<CellSet, ExtendError> {
    Ok(extend_with_details(b, cells)?.cells)
}

/// Same as [`extend_partition`], keeping the intermediate structures.
pub fn extend_with_details(b: &PolygonV, cells: &CellSet) -> Result<Extension, ExtendError> {
    let polys = cell_polygons(b, cells)?;
    validate_polygons(b, cells, &polys)?;
    let graph = graph_from_polygons(b, &polys)?;
    let initial = rays_from_polygons(b, &graph, &polys)?;
    let rays = erase_rays(&initial)?;

    let mut pts: Vec<Point2> = b.vertices().to_vec();
    pts.extend(graph.vertices.iter().copied());
    let tol = 1e-9 * ray_scale(&initial.rays);
    for i in 0..initial.len() {
        for j in i + 1..initial.len() {
            if let Some((s, _)) = crossing(&initial.rays[i], &initial.rays[j], tol) {
                pts.push(initial.rays[i].at(s));
            }
        }
    }
    let core = Rect::around(&pts);
    let frame = core.inflated(1.0 + 0.5 * core.width().max(core.height()));

    let mut out: Vec<HPolyhedron> = cells.cells().to_vec();
    let faces = if graph.is_empty() {
        if let Some(j) = graph.sole_owner {
            out[j] = HPolyhedron::whole_space(2);
        }
        vec![]
    } else {
        let faces = exterior_faces(b, &graph, &rays, &frame)?;
        for (j, poly) in polys.iter().enumerate() {
            let arcs = graph.arcs_of(j);
            if arcs.is_empty() {
                continue;
            }
            let poly = poly.as_ref().expect("arc owners have polygons");
            out[j] = glue(j, poly, arcs.iter().map(|&i| faces[i].as_slice()), &frame)?;
        }
        faces
    };
    Ok(Extension {
        graph,
        initial,
        rays,
        faces,
        frame,
        cells: CellSet::new(2, out, Ambient::Space),
    })
}

/// `conv(C_j ∪ faces)`, checked to be an actual union by area, with the frame
/// edges dropped from the H-representation.
fn glue<'a>(
    j: usize,
    poly: &PolygonV,
    faces: impl Iterator<Item = &'a [Point2]>,
    frame: &Rect,
) -> Result<HPolyhedron, ExtendError> {
    let mut pts = poly.vertices().to_vec();
    let mut area = poly.area();
    for f in faces {
        area += signed_area(f);
        pts.extend_from_slice(f);
    }
    let hull = convex_hull(&pts);
    let hull_area = signed_area(&hull);
    if (hull_area - area).abs() > 1e-6 * hull_area.max(1.0) {
        return Err(ExtendError::Contract(format!(
            "cell {j}: union with its exterior faces is not convex (area {area:.6} vs hull {hull_area:.6})"
        )));
    }
    let tol = 1e-9 * frame.width().max(frame.height());
    let m = hull.len();
    let hs = (0..m)
        .map(|i| (hull[i], hull[(i + 1) % m]))
        .filter(|&(p, q)| !frame.on_same_side(p, q, tol))
        .map(|(p, q)| edge_halfspace(p, q))
        .collect();
    Ok(HPolyhedron::new(2, hs))
}

/// Planar graph of `∂B`, ray pieces and the frame; returns the face of each arc.
fn exterior_faces(
    b: &PolygonV,
    graph: &BoundaryGraph,
    rays: &RaySystem,
    frame: &Rect,
) -> Result<Vec<Vec<Point2>>, ExtendError> {
    let scale = frame.width().max(frame.height());
    let tol = 1e-9 * scale;
    let mut nodes: Vec<Point2> = Vec::new();
    let node = |p: Point2, nodes: &mut Vec<Point2>| -> usize {
        if let Some(i) = nodes.iter().position(|&q| dist2(p, q) <= tol) {
            i
        } else {
            nodes.push(p);
            nodes.len() - 1
        }
    };

    let mut segs: Vec<(usize, usize)> = Vec::new();
    let bv = b.vertices();
    let ids: Vec<usize> = bv.iter().map(|&p| node(p, &mut nodes)).collect();
    for k in 0..ids.len() {
        segs.push((ids[k], ids[(k + 1) % ids.len()]));
    }
    let anchors: Vec<usize> = graph
        .vertices
        .iter()
        .map(|&a| node(a, &mut nodes))
        .collect();
    for (i, r) in rays.rays.iter().enumerate() {
        let end = r.end().unwrap_or_else(|| frame_exit(frame, r));
        let e = node(end, &mut nodes);
        segs.push((anchors[i], e));
    }
    let corners = frame.corners();
    let cids: Vec<usize> = corners.iter().map(|&p| node(p, &mut nodes)).collect();
    for k in 0..4 {
        segs.push((cids[k], cids[(k + 1) % 4]));
    }

    // Split every segment at the nodes lying on it.
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for &(u, v) in &segs {
        let (p, q) = (nodes[u], nodes[v]);
        let len = dist2(p, q);
        if len <= tol {
            continue;
        }
        let d = scale2(sub2(q, p), 1.0 / len);
        let mut on: Vec<(f64, usize)> = nodes
            .iter()
            .enumerate()
            .filter(|&(w, _)| w != u && w != v)
            .filter_map(|(w, &x)| {
                let t = dot2(d, sub2(x, p));
                (t > tol && t < len - tol && cross(d, sub2(x, p)).abs() <= tol).then_some((t, w))
            })
            .collect();
        on.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut chain = vec![u];
        chain.extend(on.into_iter().map(|x| x.1));
        chain.push(v);
        for w in chain.windows(2) {
            let key = (w[0].min(w[1]), w[0].max(w[1]));
            if w[0] != w[1] && !edges.contains(&key) {
                edges.push(key);
            }
        }
    }

    // Half-edges 2e: u -> v and 2e+1: v -> u.
    let he_from = |h: usize| {
        if h.is_multiple_of(2) {
            edges[h / 2].0
        } else {
            edges[h / 2].1
        }
    };
    let he_to = |h: usize| {
        if h.is_multiple_of(2) {
            edges[h / 2].1
        } else {
            edges[h / 2].0
        }
    };
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
    for h in 0..2 * edges.len() {
        out[he_from(h)].push(h);
    }
    let angle = |h: usize| {
        let d = sub2(nodes[he_to(h)], nodes[he_from(h)]);
        d[1].atan2(d[0])
    };
    for list in out.iter_mut() {
        list.sort_by(|&a, &b| angle(a).total_cmp(&angle(b)));
    }
    let next = |h: usize| {
        let v = he_to(h);
        let list = &out[v];
        let k = list
            .iter()
            .position(|&x| x == (h ^ 1))
            .expect("twin present");
        list[(k + list.len() - 1) % list.len()]
    };

    let mut face_of = vec![usize::MAX; 2 * edges.len()];
    let mut rings: Vec<Vec<usize>> = Vec::new();
    for start in 0..2 * edges.len() {
        if face_of[start] != usize::MAX {
            continue;
        }
        let id = rings.len();
        let mut ring = Vec::new();
        let mut h = start;
        loop {
            face_of[h] = id;
            ring.push(he_from(h));
            h = next(h);
            if h == start {
                break;
            }
            if ring.len() > 2 * edges.len() {
                return Err(ExtendError::Contract("face tracing did not close".into()));
            }
        }
        rings.push(ring);
    }
    let area_tol = 1e-12 * scale * scale;
    let ring_pts = |r: &[usize]| r.iter().map(|&i| nodes[i]).collect::<Vec<_>>();
    let positive = rings
        .iter()
        .filter(|r| signed_area(&ring_pts(r)) > area_tol)
        .count();
    let n = graph.len();
    if positive != n + 1 {
        return Err(ExtendError::Contract(format!(
            "ray arrangement splits the exterior into {} parts, expected {n}",
            positive.saturating_sub(1)
        )));
    }

    let mut seen = Vec::new();
    let mut faces = Vec::with_capacity(n);
    for i in 0..n {
        let from = anchors[(i + 1) % n];
        let to = match graph.corners[i].last() {
            Some(&c) => nodes
                .iter()
                .position(|&q| dist2(c, q) <= tol)
                .expect("corners are nodes"),
            None => anchors[i],
        };
        let h = (0..2 * edges.len())
            .find(|&h| he_from(h) == from && he_to(h) == to)
            .ok_or_else(|| {
                ExtendError::Contract(format!("arc {i} is not an edge of the arrangement"))
            })?;
        let f = face_of[h];
        let pts = ring_pts(&rings[f]);
        if seen.contains(&f) || signed_area(&pts) <= area_tol {
            return Err(ExtendError::Contract(format!(
                "arc {i} has no exterior face of its own"
            )));
        }
        seen.push(f);
        faces.push(pts);
    }
    Ok(faces)
}

fn frame_exit(frame: &Rect, r: &Ray) -> Point2 {
    let mut t = f64::INFINITY;
    for k in 0..2 {
        if r.dir[k] > 0.0 {
            t = t.min((frame.max[k] - r.origin[k]) / r.dir[k]);
        } else if r.dir[k] < 0.0 {
            t = t.min((frame.min[k] - r.origin[k]) / r.dir[k]);
        }
    }
    r.at(t)
}

/// Sampled check of an extension.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ExtensionCheck {
    /// Samples drawn inside `B` for the contract `V_i ∩ B = C_i`.
    pub body_samples: usize,
    /// Samples where some cell is strictly inside `V_i` but strictly outside
    /// `C_i`, or the reverse.
    pub mismatches: usize,
    /// Samples in the test box (ten diameters wide) for cover/disjointness.
    pub box_samples: usize,
    pub uncovered: usize,
    pub overlapping: usize,
    /// Cells whose clipped polygon fails the convexity check.
    pub nonconvex: usize,
    /// First sample violating the contract or the cover/disjointness check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_failure: Option<Point2>,
}

impl ExtensionCheck {
    pub fn ok(&self) -> bool {
        self.mismatches == 0 && self.uncovered == 0 && self.overlapping == 0 && self.nonconvex == 0
    }
}

/// Checks the extension contract on `samples` points of `B` and `samples`
/// points of the test box.
pub fn check_extension(
    b: &PolygonV,
    original: &CellSet,
    extended: &CellSet,
    samples: usize,
    seed: u64,
) -> ExtensionCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bounds = b.bounds();
    let scale = scale_of(b);
    let tol = EPS_GEO * scale;
    let mut out = ExtensionCheck::default();

    let mut inside = Vec::with_capacity(samples);
    while inside.len() < samples {
        let p = [
            rng.random_range(bounds.min[0]..bounds.max[0]),
            rng.random_range(bounds.min[1]..bounds.max[1]),
        ];
        if b.contains(p, 0.0) {
            inside.push(p);
        }
    }
    out.body_samples = inside.len();
    for p in &inside {
        let bad = (0..extended.len()).any(|i| {
            let v = extended.cell(i).slack(p);
            let c = original.cell(i).slack(p);
            (v > tol && c < -tol) || (v < -tol && c > tol)
        });
        if bad {
            out.mismatches += 1;
            out.first_failure.get_or_insert(*p);
        }
    }

    let c = b.centroid();
    let diam = bounds.width().hypot(bounds.height());
    let test = Rect::new(
        [c[0] - 5.0 * diam, c[1] - 5.0 * diam],
        [c[0] + 5.0 * diam, c[1] + 5.0 * diam],
    );
    let outer: Vec<Vec<f64>> = (0..samples)
        .map(|_| {
            vec![
                rng.random_range(test.min[0]..test.max[0]),
                rng.random_range(test.min[1]..test.max[1]),
            ]
        })
        .collect();
    let pc = extended.check_partition(&outer, tol * 10.0);
    out.box_samples = pc.samples;
    out.uncovered = pc.uncovered;
    out.overlapping = pc.overlapping;
    if out.first_failure.is_none() && !pc.ok() {
        out.first_failure = outer
            .iter()
            .find(|x| {
                !extended
                    .check_partition(std::slice::from_ref(*x), tol * 10.0)
                    .ok()
            })
            .map(|x| [x[0], x[1]]);
    }
    out.nonconvex = extended
        .cells()
        .iter()
        .filter(|v| !v.has_empty_interior())
        .filter(|v| match polygon_from_hrep(v, &test) {
            Ok(p) => !crate::polygon::is_convex_ccw(p.vertices(), 0.0),
            Err(_) => true,
        })
        .count();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn unit_square() -> PolygonV {
        PolygonV::new(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap()
    }

    fn close(p: Point2, q: Point2) -> bool {
        dist2(p, q) < 1e-9
    }

    fn rays(list: &[(Point2, Point2)]) -> RaySystem {
        RaySystem {
            rays: list
                .iter()
                .map(|&(o, d)| Ray {
                    origin: o,
                    dir: unit(d),
                    length: f64::INFINITY,
                })
                .collect(),
            trims: vec![],
            certificates: vec![],
        }
    }

    #[test]
    fn square_split_graph() {
        let (b, cells) = fixtures::square_split(0.5);
        let g = boundary_graph(&b, &cells).unwrap();
        assert_eq!(g.len(), 2);
        assert!(close(g.vertices[0], [0.5, 0.0]));
        assert!(close(g.vertices[1], [0.5, 1.0]));
        // right cell (index 1) owns the arc through (1,0) and (1,1)
        assert_eq!(g.owners, vec![1, 0]);
        assert_eq!(g.corners[0], vec![[1.0, 0.0], [1.0, 1.0]]);
        assert_eq!(g.corners[1], vec![[0.0, 1.0], [0.0, 0.0]]);
    }

    #[test]
    fn single_cell_has_no_vertices() {
        let b = unit_square();
        let cells = CellSet::new(2, vec![b.to_hpolyhedron()], Ambient::Space);
        let g = boundary_graph(&b, &cells).unwrap();
        assert!(g.is_empty());
        assert_eq!(g.sole_owner, Some(0));
        let v = extend_partition(&b, &cells).unwrap();
        assert_eq!(v.cell(0).len(), 0);
    }

    #[test]
    fn square_split_rays_and_extension() {
        let (b, cells) = fixtures::square_split(0.5);
        let g = boundary_graph(&b, &cells).unwrap();
        let r = initial_rays(&b, &g, &cells).unwrap();
        assert!(close(r.rays[0].dir, [0.0, -1.0]));
        assert!(close(r.rays[1].dir, [0.0, 1.0]));
        assert!(r.certificates.iter().all(|&c| c >= 0.0));
        let e = erase_rays(&r).unwrap();
        assert!(e.trims.is_empty());
        let v = extend_partition(&b, &cells).unwrap();
        // V_1 = {x <= 1/2}, V_2 = {x >= 1/2}
        let l = v.cell(0);
        assert_eq!(l.len(), 1);
        assert!(close(
            [l.halfspaces()[0].normal()[0], l.halfspaces()[0].normal()[1]],
            [1.0, 0.0]
        ));
        assert!((l.halfspaces()[0].bound() - 0.5).abs() < 1e-9);
        let r = v.cell(1);
        assert_eq!(r.len(), 1);
        assert!((r.halfspaces()[0].bound() + 0.5).abs() < 1e-9);
    }

    #[test]
    fn diagonal_split_extends_the_diagonal() {
        let b = unit_square();
        let lower = HPolyhedron::from_rows(2, vec![(vec![-1.0, 1.0], 0.0)]).unwrap();
        let upper = HPolyhedron::from_rows(2, vec![(vec![1.0, -1.0], 0.0)]).unwrap();
        let cells = crate::partition::restrict(
            &CellSet::new(2, vec![lower, upper], Ambient::Space),
            &crate::Body::new(b.to_hpolyhedron()).unwrap(),
        );
        let g = boundary_graph(&b, &cells).unwrap();
        assert_eq!(g.len(), 2);
        let r = initial_rays(&b, &g, &cells).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!(close(r.rays[0].origin, [0.0, 0.0]) && close(r.rays[0].dir, [-s, -s]));
        assert!(close(r.rays[1].origin, [1.0, 1.0]) && close(r.rays[1].dir, [s, s]));
        let v = extend_partition(&b, &cells).unwrap();
        assert!(v.cell(0).contains(&[5.0, -3.0], 0.0));
        assert!(v.cell(1).contains(&[-3.0, 5.0], 0.0));
        assert!(!v.cell(0).contains(&[-3.0, 5.0], 1e-9));
    }

    #[test]
    fn quadrants_extend_to_quadrants() {
        let (b, cells) = fixtures::square_quadrants();
        let v = extend_partition(&b, &cells).unwrap();
        let probes = [[-5.0, -5.0], [5.0, -5.0], [5.0, 5.0], [-5.0, 5.0]];
        for (i, p) in probes.iter().enumerate() {
            let hit = v.cells_containing(p, 0.0);
            assert_eq!(hit, vec![i], "probe {p:?}");
            assert!(!v.cell(i).is_bounded());
            assert_eq!(v.cell(i).len(), 2);
        }
        let chk = check_extension(&b, &cells, &v, 2000, 1);
        assert!(chk.ok(), "{chk:?}");
    }

    #[test]
    fn pinwheel_extension() {
        let (b, cells) = fixtures::pinwheel();
        let x = extend_with_details(&b, &cells).unwrap();
        assert_eq!(x.graph.len(), 4);
        // centre square owns no arc
        assert!(x.graph.arcs_of(4).is_empty());
        let expect = [
            ([1.0 / 3.0, 0.0], [0.0, -1.0]),
            ([1.0, 1.0 / 3.0], [1.0, 0.0]),
            ([2.0 / 3.0, 1.0], [0.0, 1.0]),
            ([0.0, 2.0 / 3.0], [-1.0, 0.0]),
        ];
        for (r, (o, d)) in x.initial.rays.iter().zip(expect) {
            assert!(close(r.origin, o) && close(r.dir, d), "{r:?}");
        }
        // the axis-aligned pinwheel never crosses itself
        assert!(x.rays.trims.is_empty());
        assert!(crossings(&x.rays).is_empty());
        assert_eq!(x.cells.len(), 5);
        assert!(x.cells.cell(4).is_bounded());
        assert_eq!(x.cells.cell(4), cells.cell(4));
        for i in 0..4 {
            assert!(!x.cells.cell(i).is_bounded());
        }
        let chk = check_extension(&b, &cells, &x.cells, 4000, 2);
        assert!(chk.ok(), "{chk:?}");
    }

    #[test]
    fn three_crossing_rays() {
        let r = rays(&[
            ([-1.0, 0.0], [1.0, -1.0]),
            ([0.0, 0.0], [0.0, -1.0]),
            ([1.0, 0.0], [-1.0, -2.0]),
        ]);
        assert_eq!(crossings(&r).len(), 3);
        let e = erase_rays(&r).unwrap();
        assert!(e.trims.len() <= 2 && !e.trims.is_empty());
        assert!(crossings(&e).is_empty());
        // brute force: no pair of surviving pieces crosses transversally
        for i in 0..3 {
            for j in i + 1..3 {
                assert!(crossing(&e.rays[i], &e.rays[j], 1e-9).is_none());
            }
        }
        assert_eq!(e.trims[0].trimmed, 1);
        assert!(close(e.trims[0].point, [0.0, -1.0]));
        assert_eq!(e.trims[1].trimmed, 2);
        assert!(close(e.trims[1].point, [1.0 / 3.0, -4.0 / 3.0]));
    }

    #[test]
    fn parallel_rays_untouched() {
        let r = rays(&[([0.0, 0.0], [0.0, -1.0]), ([1.0, 0.0], [0.0, -1.0])]);
        let e = erase_rays(&r).unwrap();
        assert_eq!(e, r);
    }

    #[test]
    fn slanted_split_trims_once() {
        let (b, cells) = fixtures::slanted_strip();
        let x = extend_with_details(&b, &cells).unwrap();
        assert_eq!(x.rays.trims.len(), 1);
        assert!(close(x.rays.trims[0].point, [0.5, -1.0]));
        // the middle cell closes below B at the crossing
        let mid = x.cells.cell(1);
        assert!(mid.contains(&[0.5, -0.99], 1e-9));
        assert!(!mid.contains(&[0.5, -1.01], 1e-9));
        let chk = check_extension(&b, &cells, &x.cells, 4000, 3);
        assert!(chk.ok(), "{chk:?}");
    }

    #[test]
    fn overlapping_cells_rejected() {
        let b = unit_square();
        let l = HPolyhedron::from_rows(2, vec![(vec![1.0, 0.0], 0.6)]).unwrap();
        let r = HPolyhedron::from_rows(2, vec![(vec![-1.0, 0.0], -0.4)]).unwrap();
        let cells = CellSet::new(2, vec![l, r], Ambient::Space);
        assert!(matches!(
            extend_partition(&b, &cells),
            Err(ExtendError::InconsistentPartition { .. })
        ));
    }

    #[test]
    fn gap_rejected_on_boundary() {
        let b = unit_square();
        let l = HPolyhedron::from_rows(2, vec![(vec![1.0, 0.0], 0.4)]).unwrap();
        let r = HPolyhedron::from_rows(2, vec![(vec![-1.0, 0.0], -0.6)]).unwrap();
        let cells = CellSet::new(2, vec![l, r], Ambient::Space);
        assert!(matches!(
            boundary_graph(&b, &cells),
            Err(ExtendError::InconsistentPartition { .. })
        ));
    }

    #[test]
    fn tangent_internal_edge_has_no_direction() {
        // Owners deliberately swapped: the left cell's edge into (1/2, 0)
        // runs along the bottom of B, so no outward ray exists.
        let b = unit_square();
        let g = BoundaryGraph {
            vertices: vec![[0.5, 0.0], [0.5, 1.0]],
            positions: vec![0.5, 2.5],
            owners: vec![0, 1],
            corners: vec![vec![[1.0, 0.0], [1.0, 1.0]], vec![[0.0, 1.0], [0.0, 0.0]]],
            perimeter: 4.0,
            sole_owner: None,
        };
        let polys = vec![
            Some(PolygonV::new(vec![[0.0, 0.0], [0.5, 0.0], [0.5, 1.0], [0.0, 1.0]]).unwrap()),
            Some(PolygonV::new(vec![[0.5, 0.0], [1.0, 0.0], [1.0, 1.0], [0.5, 1.0]]).unwrap()),
        ];
        assert_eq!(
            rays_from_polygons(&b, &g, &polys),
            Err(ExtendError::NoValidDirection { vertex: 0 })
        );
        let mut ok = g.clone();
        ok.owners = vec![1, 0];
        assert!(rays_from_polygons(&b, &ok, &polys).is_ok());
    }
}

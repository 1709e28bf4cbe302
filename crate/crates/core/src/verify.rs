//! Inequality reports `Σ r_B(C_i) >= 1`, the translation sweep
//! `r(y) = Σ r_B(B ∩ (V_i + y))`, the region `Y = ∩ (B + (-V_i))`, and
//! reproducible random instances.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GeomError, VerifyError};
use crate::extend2d::{check_extension, extend_partition, validate_partition, ExtensionCheck};
use crate::geom::{dot, norm, AffineFunc, HPolyhedron, Halfspace};
use crate::inradius::{relative_inradius, Body, InradiusStatus};
use crate::partition::{
    build_affine_cells, hierarchical_cells, power_functions, restrict, voronoi_functions,
    AffineSpec, Ambient, CellSet, PartitionTree,
};
use crate::polygon::{polygon_from_hrep, Point2, PolygonV, Rect};
use crate::serde_ext;

/// Margin tolerance for affine, Voronoi and hierarchical instances.
pub const AFFINE_MARGIN_TOL: f64 = 1e-7;
/// Margin tolerance for instances routed through the planar extension.
pub const EXTENDED_MARGIN_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    #[serde(with = "serde_ext::float")]
    pub h: f64,
    pub witness: Option<Vec<f64>>,
    pub status: InradiusStatus,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceMeta {
    pub kind: InstanceKind,
    pub seed: u64,
    pub k: usize,
    pub d: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KadetsReport {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub meta: Option<InstanceMeta>,
    pub cells: Vec<CellReport>,
    /// `Σ h_i` over nonempty cells.
    pub total: f64,
    pub margin: f64,
}

/// Per-cell relative inradii, their sum and `margin = total - 1`. Empty cells
/// contribute 0.
pub fn kadets_sum(body: &Body, cells: &CellSet) -> Result<KadetsReport, VerifyError> {
    if cells.dim() != body.dim() {
        return Err(GeomError::DimensionMismatch {
            expected: body.dim(),
            got: cells.dim(),
        }
        .into());
    }
    let mut out = Vec::with_capacity(cells.len());
    let mut total = 0.0;
    for (i, c) in cells.cells().iter().enumerate() {
        let c = c.intersect(body.polyhedron());
        let r = relative_inradius(body, &c)?;
        match r.status {
            InradiusStatus::Unbounded => return Err(VerifyError::UnboundedCell(i)),
            InradiusStatus::Finite => total += r.h,
            InradiusStatus::Empty => {}
        }
        out.push(CellReport {
            h: r.h,
            witness: r.witness,
            status: r.status,
        });
    }
    Ok(KadetsReport {
        meta: None,
        cells: out,
        total,
        margin: total - 1.0,
    })
}

/// `C_i(y) = B ∩ (V_i + y)`.
pub fn translated_cells(body: &Body, space: &CellSet, y: &[f64]) -> CellSet {
    let cells = space
        .cells()
        .iter()
        .map(|v| v.translated(y).intersect(body.polyhedron()))
        .collect();
    CellSet::new(space.dim(), cells, Ambient::Body(body.clone()))
}

/// `r(y)`, `-inf` as soon as one `C_i(y)` is empty, plus the empty-interior
/// flags of the cells.
pub fn r_of_y(body: &Body, space: &CellSet, y: &[f64]) -> Result<(f64, Vec<bool>), VerifyError> {
    let cells = translated_cells(body, space, y);
    let mut total = 0.0;
    let mut flags = Vec::with_capacity(cells.len());
    for (i, c) in cells.cells().iter().enumerate() {
        flags.push(c.has_empty_interior());
        let r = relative_inradius(body, c)?;
        match r.status {
            InradiusStatus::Unbounded => return Err(VerifyError::UnboundedCell(i)),
            InradiusStatus::Empty => total = f64::NEG_INFINITY,
            InradiusStatus::Finite => total += r.h,
        }
    }
    Ok((total, flags))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VanishEvent {
    pub step: usize,
    pub s: f64,
    pub cell: usize,
    /// `true` when the cell's interior empties, `false` when it reappears.
    pub vanished: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub s: Vec<f64>,
    pub points: Vec<Vec<f64>>,
    #[serde(with = "serde_ext::float_vec")]
    pub values: Vec<f64>,
    /// `r(mid) - (r(prev) + r(next))/2` on consecutive triples; `+inf` where
    /// an endpoint is `-inf`.
    #[serde(with = "serde_ext::float_vec")]
    pub residuals: Vec<f64>,
    pub vanish: Vec<VanishEvent>,
}

impl SweepResult {
    pub fn min_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Samples `r(y)` along `y = y0 + s·u`, `s` in `[s0, s1]` with `steps + 1`
/// equally spaced points.
pub fn sweep_translation(
    body: &Body,
    space: &CellSet,
    y0: &[f64],
    u: &[f64],
    range: (f64, f64),
    steps: usize,
) -> Result<SweepResult, VerifyError> {
    let steps = steps.max(2);
    let (s0, s1) = range;
    let mut out = SweepResult {
        s: Vec::new(),
        points: Vec::new(),
        values: Vec::new(),
        residuals: Vec::new(),
        vanish: Vec::new(),
    };
    let mut prev_flags: Option<Vec<bool>> = None;
    for step in 0..=steps {
        let s = s0 + (s1 - s0) * step as f64 / steps as f64;
        let y: Vec<f64> = y0.iter().zip(u).map(|(a, b)| a + s * b).collect();
        let (r, flags) = r_of_y(body, space, &y)?;
        if let Some(prev) = &prev_flags {
            for (cell, (&a, &b)) in prev.iter().zip(&flags).enumerate() {
                if a != b {
                    out.vanish.push(VanishEvent {
                        step,
                        s,
                        cell,
                        vanished: b,
                    });
                }
            }
        }
        prev_flags = Some(flags);
        out.s.push(s);
        out.points.push(y);
        out.values.push(r);
    }
    out.residuals = out
        .values
        .windows(3)
        .map(|w| {
            if w[0] == f64::NEG_INFINITY || w[2] == f64::NEG_INFINITY {
                f64::INFINITY
            } else {
                w[1] - 0.5 * (w[0] + w[2])
            }
        })
        .collect();
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TranslationRegion {
    pub region: HPolyhedron,
}

impl TranslationRegion {
    pub fn is_bounded(&self) -> bool {
        self.region.is_bounded()
    }
}

/// `Y = ∩_i (B + (-V_i))`, each Minkowski summand written through support
/// functions over the normals of both summands. `Y` may be unbounded (e.g. a
/// strip), but it is a halfplane or the whole plane only when all `V_i` share
/// a halfplane, which needs `k = 1`.
pub fn translation_region_2d(
    b: &PolygonV,
    space: &CellSet,
) -> Result<TranslationRegion, VerifyError> {
    if space.dim() != 2 {
        return Err(GeomError::RequiresDimension(2).into());
    }
    let bh = b.to_hpolyhedron();
    let mut rows: Vec<Halfspace> = Vec::new();
    for v in space.cells() {
        if v.is_empty() {
            return Ok(TranslationRegion {
                region: HPolyhedron::from_rows(
                    2,
                    vec![(vec![1.0, 0.0], -1.0), (vec![-1.0, 0.0], -1.0)],
                )?,
            });
        }
        let normals = bh.halfspaces().iter().map(|h| h.normal().to_vec()).chain(
            v.halfspaces()
                .iter()
                .map(|h| h.normal().iter().map(|x| -x).collect()),
        );
        for u in normals {
            let neg: Vec<f64> = u.iter().map(|x| -x).collect();
            let hv = v.support_ext(&neg)?;
            if hv.is_finite() {
                rows.push(Halfspace::new(u.clone(), bh.support(&u)? + hv)?);
            }
        }
    }
    Ok(TranslationRegion {
        region: HPolyhedron::new(2, rows),
    })
}

/// Sampled boundary and interior checks of `Y`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RegionCheck {
    pub boundary_samples: usize,
    /// Boundary points where every `C_i(y)` keeps a nonempty interior.
    pub boundary_violations: usize,
    pub interior_samples: usize,
    pub min_interior_r: f64,
}

/// Samples `∂Y` (uniformly per edge) and the interior of `Y` (random convex
/// combinations of its vertices). An unbounded `Y` is clipped to a frame
/// around `B`; frame edges are not part of `∂Y` and are skipped.
pub fn check_translation_region(
    b: &PolygonV,
    space: &CellSet,
    region: &TranslationRegion,
    boundary: usize,
    interior: usize,
    seed: u64,
) -> Result<RegionCheck, VerifyError> {
    let body = Body::new(b.to_hpolyhedron())?;
    let frame = if region.is_bounded() {
        let (lo, hi) = region.region.bounding_box()?;
        Rect::new([lo[0], lo[1]], [hi[0], hi[1]]).inflated(1.0)
    } else {
        let r = b.bounds();
        r.inflated(3.0 * r.width().hypot(r.height()))
    };
    let poly = polygon_from_hrep(&region.region, &frame)?;
    let verts = poly.vertices();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = RegionCheck {
        min_interior_r: f64::INFINITY,
        ..Default::default()
    };
    let per_edge = boundary.div_ceil(verts.len());
    let tol = 1e-9 * frame.width().max(frame.height());
    for (p, q) in poly.edges() {
        if frame.on_same_side(p, q, tol) {
            continue;
        }
        for _ in 0..per_edge {
            let t: f64 = rng.random();
            let y = [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])];
            let (_, flags) = r_of_y(&body, space, &y)?;
            out.boundary_samples += 1;
            if !flags.iter().any(|&f| f) {
                out.boundary_violations += 1;
            }
        }
    }
    for _ in 0..interior {
        let w: Vec<f64> = verts
            .iter()
            .map(|_| -rng.random::<f64>().max(1e-300).ln())
            .collect();
        let sum: f64 = w.iter().sum();
        let mut y = [0.0, 0.0];
        for (v, wi) in verts.iter().zip(&w) {
            y[0] += v[0] * wi / sum;
            y[1] += v[1] * wi / sum;
        }
        let (r, _) = r_of_y(&body, space, &y)?;
        out.interior_samples += 1;
        out.min_interior_r = out.min_interior_r.min(r);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InstanceKind {
    Affine,
    Voronoi,
    Hierarchical,
    Extended2d,
    Fixture,
}

impl InstanceKind {
    pub const ALL: [InstanceKind; 5] = [
        InstanceKind::Affine,
        InstanceKind::Voronoi,
        InstanceKind::Hierarchical,
        InstanceKind::Extended2d,
        InstanceKind::Fixture,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            InstanceKind::Affine => "affine",
            InstanceKind::Voronoi => "voronoi",
            InstanceKind::Hierarchical => "hierarchical",
            InstanceKind::Extended2d => "extended2d",
            InstanceKind::Fixture => "fixture",
        }
    }

    pub fn margin_tol(&self) -> f64 {
        match self {
            InstanceKind::Extended2d | InstanceKind::Fixture => EXTENDED_MARGIN_TOL,
            _ => AFFINE_MARGIN_TOL,
        }
    }
}

impl fmt::Display for InstanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InstanceKind {
    type Err = VerifyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| VerifyError::Unsupported(format!("unknown instance kind {s:?}")))
    }
}

/// How the partition of an instance was produced.
#[derive(Clone, Debug, PartialEq)]
pub enum Generator {
    Affine(AffineSpec),
    Tree(PartitionTree),
    /// Hand-built or non-affine cells (pinwheels), already extended to the plane.
    Cells,
}

#[derive(Clone, Debug)]
pub struct Instance {
    pub meta: InstanceMeta,
    pub body: Body,
    /// Planar body as a polygon (`d = 2` only).
    pub polygon: Option<PolygonV>,
    pub generator: Generator,
    /// Partition of the whole space (`V_i`).
    pub space: CellSet,
    /// `C_i = V_i ∩ B`, or the original cells for extended instances.
    pub cells: CellSet,
}

const MAX_ATTEMPTS: usize = 200;

fn instance_rng(kind: InstanceKind, seed: u64, k: usize, d: usize) -> ChaCha8Rng {
    let tag = kind as u64 + 1;
    let mix = seed
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(tag << 56)
        .wrapping_add((k as u64) << 40)
        .wrapping_add((d as u64) << 32);
    ChaCha8Rng::seed_from_u64(mix)
}

fn random_unit(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let n = norm(&v);
        if n > 1e-6 {
            return v.iter().map(|x| x / n).collect();
        }
    }
}

/// Random body: `2d + 4` unit normals with bounds in `[1, 1.5]`, resampled
/// until bounded.
pub fn random_body(rng: &mut ChaCha8Rng, d: usize) -> Result<Body, VerifyError> {
    for _ in 0..MAX_ATTEMPTS {
        let hs = (0..2 * d + 4)
            .map(|_| {
                let n = random_unit(rng, d);
                Halfspace::new(n, 1.0 + rng.random_range(0.0..0.5))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if let Ok(b) = Body::new(HPolyhedron::new(d, hs)) {
            return Ok(b);
        }
    }
    Err(VerifyError::GenerationFailed(MAX_ATTEMPTS))
}

/// Rejection sample from `p ∩ B`, falling back to a jittered Chebyshev centre.
fn sample_in(rng: &mut ChaCha8Rng, body: &Body, p: &HPolyhedron) -> Vec<f64> {
    let (lo, hi) = body
        .polyhedron()
        .bounding_box()
        .expect("bodies are bounded");
    let both = p.intersect(body.polyhedron());
    for _ in 0..400 {
        let x: Vec<f64> = lo
            .iter()
            .zip(&hi)
            .map(|(a, b)| rng.random_range(*a..*b))
            .collect();
        if both.slack(&x) > 0.0 {
            return x;
        }
    }
    match both.chebyshev() {
        Some((c, r)) if r > 0.0 => c
            .iter()
            .map(|x| x + 0.5 * r * rng.random_range(-1.0..1.0) / (c.len() as f64).sqrt())
            .collect(),
        Some((c, _)) => c,
        None => lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).collect(),
    }
}

fn random_power(
    rng: &mut ChaCha8Rng,
    body: &Body,
    region: &HPolyhedron,
    m: usize,
    weights: bool,
) -> AffineSpec {
    let sites: Vec<Vec<f64>> = (0..m).map(|_| sample_in(rng, body, region)).collect();
    let w: Vec<f64> = (0..m)
        .map(|_| {
            if weights {
                rng.random_range(-0.05..0.05)
            } else {
                0.0
            }
        })
        .collect();
    power_functions(&sites, &w).expect("sites share a dimension")
}

/// Graded tree with `k` leaves. Two-way splits are hyperplane cuts through a
/// point of the parent cell; wider splits use power functions of sites
/// sampled in the parent cell.
fn random_tree(rng: &mut ChaCha8Rng, body: &Body, k: usize) -> PartitionTree {
    let d = body.dim();
    let max_depth = (usize::BITS - 1 - k.leading_zeros()) as usize;
    let depth = rng.random_range(1..=max_depth.clamp(1, 3));

    fn split(rng: &mut ChaCha8Rng, total: usize, depth: usize) -> Vec<usize> {
        // each part needs at least 2^(depth-1) leaves
        let min = 1usize << (depth - 1);
        let max_parts = (total / min).max(2);
        let parts = rng.random_range(2..=max_parts);
        let mut sizes = vec![min; parts];
        for _ in 0..total - min * parts {
            let i = rng.random_range(0..parts);
            sizes[i] += 1;
        }
        sizes
    }

    fn build(
        rng: &mut ChaCha8Rng,
        body: &Body,
        func: AffineFunc,
        cell: HPolyhedron,
        leaves: usize,
        depth: usize,
    ) -> PartitionTree {
        if depth == 0 {
            return PartitionTree::leaf(func);
        }
        let sizes = split(rng, leaves, depth);
        let m = sizes.len();
        let funcs: Vec<AffineFunc> = if m == 2 {
            let p = sample_in(rng, body, &cell);
            let a = random_unit(rng, body.dim());
            let c = dot(&a, &p);
            vec![
                AffineFunc::new(a.clone(), -c),
                AffineFunc::new(a.iter().map(|x| -x).collect(), c),
            ]
        } else {
            random_power(rng, body, &cell, m, true).funcs().to_vec()
        };
        let spec = AffineSpec::new(funcs.clone()).expect("same dimension");
        let sub = build_affine_cells(&spec);
        let children = funcs
            .into_iter()
            .zip(sizes)
            .enumerate()
            .map(|(i, (f, n))| build(rng, body, f, cell.intersect(sub.cell(i)), n, depth - 1))
            .collect();
        PartitionTree::node(func, children)
    }

    let d0 = depth.min(max_depth.max(1));
    build(
        rng,
        body,
        AffineFunc::zero(d),
        HPolyhedron::whole_space(d),
        k,
        d0,
    )
}

fn body_polygon(body: &Body) -> Result<PolygonV, VerifyError> {
    let (lo, hi) = body.polyhedron().bounding_box()?;
    let frame = Rect::new([lo[0], lo[1]], [hi[0], hi[1]]).inflated(1.0);
    Ok(polygon_from_hrep(body.polyhedron(), &frame)?)
}

/// Pinwheel around a regular `m`-gon `Q` inside `B`: cell `i` lies outside
/// edge line `i` of `Q` and inside edge line `i - 1`; `Q` is the last cell.
pub fn pinwheel_cells(b: &PolygonV, center: Point2, radius: f64, phase: f64, m: usize) -> CellSet {
    let q: Vec<Point2> = (0..m)
        .map(|i| {
            let t = phase + std::f64::consts::TAU * i as f64 / m as f64;
            [center[0] + radius * t.cos(), center[1] + radius * t.sin()]
        })
        .collect();
    let line = |i: usize| crate::polygon::edge_halfspace(q[i % m], q[(i + 1) % m]);
    let bh = b.to_hpolyhedron();
    let mut cells: Vec<HPolyhedron> = (0..m)
        .map(|i| {
            let outside = line(i).flipped();
            let inside = line(i + m - 1);
            HPolyhedron::new(2, vec![outside, inside]).intersect(&bh)
        })
        .collect();
    cells.push(HPolyhedron::new(2, (0..m).map(line).collect()).intersect(&bh));
    let body = Body::new(bh).expect("polygon is a body");
    CellSet::new(2, cells, Ambient::Body(body))
}

fn random_pinwheel(rng: &mut ChaCha8Rng, b: &PolygonV) -> Result<CellSet, VerifyError> {
    let body = Body::new(b.to_hpolyhedron())?;
    let (c, r) = body
        .polyhedron()
        .chebyshev()
        .ok_or(VerifyError::GenerationFailed(1))?;
    for _ in 0..MAX_ATTEMPTS {
        let m = rng.random_range(3..=5);
        let radius = r * rng.random_range(0.2..0.6);
        let shift = r * rng.random_range(0.0..0.3);
        let ang: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let center = [c[0] + shift * ang.cos(), c[1] + shift * ang.sin()];
        let cells = pinwheel_cells(
            b,
            center,
            radius,
            rng.random_range(0.0..std::f64::consts::TAU),
            m,
        );
        if validate_partition(b, &cells).is_ok() && extend_partition(b, &cells).is_ok() {
            return Ok(cells);
        }
    }
    Err(VerifyError::GenerationFailed(MAX_ATTEMPTS))
}

/// Reproducible random instance. `extended2d` alternates between hierarchical
/// partitions (even seeds) and pinwheels (odd seeds), both extended to the
/// plane; `fixture` is the unit-square pinwheel.
pub fn gen_instance(
    kind: InstanceKind,
    seed: u64,
    k: usize,
    d: usize,
) -> Result<Instance, VerifyError> {
    if kind == InstanceKind::Fixture {
        let (b, cells) = crate::fixtures::pinwheel();
        let body = Body::new(b.to_hpolyhedron())?;
        let space = extend_partition(&b, &cells)?;
        return Ok(Instance {
            meta: InstanceMeta {
                kind,
                seed,
                k: cells.len(),
                d: 2,
            },
            body,
            polygon: Some(b),
            generator: Generator::Cells,
            space,
            cells,
        });
    }
    if kind == InstanceKind::Extended2d && d != 2 {
        return Err(VerifyError::Unsupported(
            "extended2d instances are planar (d = 2)".into(),
        ));
    }
    if d == 0 || k == 0 {
        return Err(VerifyError::Unsupported("need d >= 1 and k >= 1".into()));
    }
    let mut rng = instance_rng(kind, seed, k, d);
    let body = random_body(&mut rng, d)?;
    let polygon = if d == 2 {
        Some(body_polygon(&body)?)
    } else {
        None
    };
    let whole = HPolyhedron::whole_space(d);
    let (generator, space, cells) = match kind {
        InstanceKind::Affine | InstanceKind::Voronoi => {
            let spec = if kind == InstanceKind::Affine {
                random_power(&mut rng, &body, &whole, k, true)
            } else {
                let sites: Vec<Vec<f64>> =
                    (0..k).map(|_| sample_in(&mut rng, &body, &whole)).collect();
                voronoi_functions(&sites)?
            };
            let space = build_affine_cells(&spec);
            let cells = restrict(&space, &body);
            (Generator::Affine(spec), space, cells)
        }
        InstanceKind::Hierarchical => {
            let tree = if k == 1 {
                PartitionTree::leaf(AffineFunc::zero(d))
            } else {
                random_tree(&mut rng, &body, k)
            };
            let space = if k == 1 {
                CellSet::new(d, vec![whole], Ambient::Space)
            } else {
                hierarchical_cells(&tree)?
            };
            let cells = restrict(&space, &body);
            (Generator::Tree(tree), space, cells)
        }
        InstanceKind::Extended2d => {
            let b = polygon.clone().expect("planar");
            if seed % 2 == 1 {
                let cells = random_pinwheel(&mut rng, &b)?;
                let space = extend_partition(&b, &cells)?;
                (Generator::Cells, space, cells)
            } else {
                let tree = random_tree(&mut rng, &body, k.max(2));
                let hier = hierarchical_cells(&tree)?;
                let cells = restrict(&hier, &body);
                let space = extend_partition(&b, &cells)?;
                (Generator::Tree(tree), space, cells)
            }
        }
        InstanceKind::Fixture => unreachable!("handled above"),
    };
    Ok(Instance {
        meta: InstanceMeta {
            kind,
            seed,
            k: cells.len(),
            d,
        },
        body,
        polygon,
        generator,
        space,
        cells,
    })
}

/// Outcome of verifying one instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub kind: InstanceKind,
    pub seed: u64,
    pub k: usize,
    pub d: usize,
    #[serde(with = "serde_ext::float")]
    pub margin: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub extension: Option<ExtensionCheck>,
    pub ok: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

/// Kadets sum on `V_i ∩ B`; extended instances also get the sampled
/// extension check with `ext_samples` points.
pub fn verify_instance(inst: &Instance, ext_samples: usize) -> Result<RunSummary, VerifyError> {
    let restricted = restrict(&inst.space, &inst.body);
    let report = kadets_sum(&inst.body, &restricted)?;
    let extension =
        match (&inst.generator, &inst.polygon, inst.meta.kind) {
            (_, Some(b), InstanceKind::Extended2d | InstanceKind::Fixture) => Some(
                check_extension(b, &inst.cells, &inst.space, ext_samples, inst.meta.seed),
            ),
            _ => None,
        };
    let ok = report.margin >= -inst.meta.kind.margin_tol() && extension.is_none_or(|e| e.ok());
    Ok(RunSummary {
        kind: inst.meta.kind,
        seed: inst.meta.seed,
        k: inst.meta.k,
        d: inst.meta.d,
        margin: report.margin,
        extension,
        ok,
        error: None,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchReport {
    pub runs: Vec<RunSummary>,
    #[serde(with = "serde_ext::float")]
    pub min_margin: f64,
    pub failures: Vec<u64>,
}

/// Generates and verifies one instance per seed in parallel; results are
/// ordered by seed.
pub fn verify_batch(
    kind: InstanceKind,
    seeds: std::ops::Range<u64>,
    k: usize,
    d: usize,
    ext_samples: usize,
) -> BatchReport {
    let mut runs: Vec<RunSummary> = seeds
        .into_par_iter()
        .map(|seed| {
            gen_instance(kind, seed, k, d)
                .and_then(|inst| verify_instance(&inst, ext_samples))
                .unwrap_or_else(|e| RunSummary {
                    kind,
                    seed,
                    k,
                    d,
                    margin: f64::NAN,
                    extension: None,
                    ok: false,
                    error: Some(e.to_string()),
                })
        })
        .collect();
    runs.sort_by_key(|r| r.seed);
    let min_margin = runs
        .iter()
        .map(|r| r.margin)
        .filter(|m| !m.is_nan())
        .fold(f64::INFINITY, f64::min);
    let failures = runs.iter().filter(|r| !r.ok).map(|r| r.seed).collect();
    BatchReport {
        runs,
        min_margin,
        failures,
    }
}

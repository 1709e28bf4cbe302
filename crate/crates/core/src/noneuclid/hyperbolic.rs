//! Hyperbolic plane in the hyperboloid model `{p : ⟨p,p⟩ = -1, p_2 > 0}` with
//! `⟨a,b⟩ = a_0 b_0 + a_1 b_1 - a_2 b_2`. A halfplane is `{p : ⟨p,m⟩ ≥ 0}` for a
//! unit spacelike `m`, and `asinh⟨p,m⟩` is the signed distance to its edge.
//! Pictures use the Poincaré disk.

use serde::{Deserialize, Serialize};

use crate::error::NonEuclidError;
use crate::minimax::{maximize_min, MinimaxOptions, Piece, OPT_TOL};

pub type Vec3 = [f64; 3];
pub type Mat3 = [[f64; 3]; 3];

pub fn mink(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] - a[2] * b[2]
}

pub fn origin() -> Vec3 {
    [0.0, 0.0, 1.0]
}

pub fn distance(p: &Vec3, q: &Vec3) -> f64 {
    (-mink(p, q)).max(1.0).acosh()
}

/// Point at distance `s` from the origin in direction `phi`.
pub fn point_at(phi: f64, s: f64) -> Vec3 {
    [s.sinh() * phi.cos(), s.sinh() * phi.sin(), s.cosh()]
}

fn chart_point(u: f64, v: f64) -> Vec3 {
    [u, v, (1.0 + u * u + v * v).sqrt()]
}

pub fn to_poincare(p: &Vec3) -> [f64; 2] {
    [p[0] / (1.0 + p[2]), p[1] / (1.0 + p[2])]
}

pub fn from_poincare(z: [f64; 2]) -> Vec3 {
    let r2 = z[0] * z[0] + z[1] * z[1];
    let d = 1.0 - r2;
    [2.0 * z[0] / d, 2.0 * z[1] / d, (1.0 + r2) / d]
}

/// Normal of the geodesic perpendicular to direction `phi` at distance `h` from
/// the origin, oriented so the halfplane contains the origin.
pub fn geodesic_normal(phi: f64, h: f64) -> Vec3 {
    [-h.cosh() * phi.cos(), -h.cosh() * phi.sin(), -h.sinh()]
}

pub fn apply(l: &Mat3, p: &Vec3) -> Vec3 {
    [0, 1, 2].map(|i| l[i][0] * p[0] + l[i][1] * p[1] + l[i][2] * p[2])
}

fn matmul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut c = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

pub fn rotation(phi: f64) -> Mat3 {
    let (s, c) = phi.sin_cos();
    [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]
}

/// Boost moving the origin a distance `beta` along the first axis.
pub fn boost(beta: f64) -> Mat3 {
    let (s, c) = (beta.sinh(), beta.cosh());
    [[c, 0.0, s], [0.0, 1.0, 0.0], [s, 0.0, c]]
}

/// Isometry taking `p` to the origin.
pub fn isometry_to_origin(p: &Vec3) -> Mat3 {
    let phi = p[1].atan2(p[0]);
    let s = p[2].max(1.0).acosh();
    matmul(&rotation(phi), &matmul(&boost(-s), &rotation(-phi)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypDisk {
    pub center: Vec3,
    pub radius: f64,
}

/// Intersection of closed halfplanes and optionally a closed disk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicRegion {
    pub sides: Vec<Vec3>,
    pub disk: Option<HypDisk>,
}

impl HyperbolicRegion {
    pub fn new(sides: Vec<Vec3>, disk: Option<HypDisk>) -> Result<Self, NonEuclidError> {
        let mut ss = Vec::with_capacity(sides.len());
        for m in sides {
            let q = mink(&m, &m);
            if !(q > 1e-300) || !q.is_finite() {
                return Err(NonEuclidError::Invalid(
                    "side normal is not spacelike".into(),
                ));
            }
            ss.push(m.map(|x| x / q.sqrt()));
        }
        if let Some(d) = &disk {
            if !(d.radius > 0.0) || (mink(&d.center, &d.center) + 1.0).abs() > 1e-9 * d.center[2] {
                return Err(NonEuclidError::Invalid("bad disk".into()));
            }
        }
        Ok(Self { sides: ss, disk })
    }

    /// Disk of radius `rho` about the origin.
    pub fn disk(rho: f64) -> Result<Self, NonEuclidError> {
        Self::new(
            vec![],
            Some(HypDisk {
                center: origin(),
                radius: rho,
            }),
        )
    }

    pub fn with_side(mut self, m: Vec3) -> Result<Self, NonEuclidError> {
        self.sides.push(m);
        Self::new(self.sides, self.disk)
    }

    /// Ideal triangle with vertices at the given angles on the circle at infinity.
    pub fn ideal_triangle(angles: [f64; 3]) -> Result<Self, NonEuclidError> {
        let mut sides = Vec::new();
        for i in 0..3 {
            let (a, b, c) = (angles[i], angles[(i + 1) % 3], angles[(i + 2) % 3]);
            let la = [a.cos(), a.sin(), 1.0];
            let lb = [b.cos(), b.sin(), 1.0];
            // m with ⟨m, la⟩ = ⟨m, lb⟩ = 0: Lorentz cross product
            let mut m = [
                la[1] * lb[2] - la[2] * lb[1],
                la[2] * lb[0] - la[0] * lb[2],
                -(la[0] * lb[1] - la[1] * lb[0]),
            ];
            let lc = [c.cos(), c.sin(), 1.0];
            if mink(&m, &lc) < 0.0 {
                m = m.map(|x| -x);
            }
            sides.push(m);
        }
        Self::new(sides, None)
    }

    /// Signed distance from `p` to the boundary (negative outside).
    pub fn depth(&self, p: &Vec3) -> f64 {
        let mut d = f64::INFINITY;
        for m in &self.sides {
            d = d.min(mink(p, m).asinh());
        }
        if let Some(disk) = &self.disk {
            d = d.min(disk.radius - distance(p, &disk.center));
        }
        d
    }

    pub fn contains(&self, p: &Vec3, tol: f64) -> bool {
        self.depth(p) >= -tol
    }

    /// Image under a Lorentz isometry.
    pub fn transformed(&self, l: &Mat3) -> Self {
        Self {
            sides: self.sides.iter().map(|m| apply(l, m)).collect(),
            disk: self.disk.as_ref().map(|d| HypDisk {
                center: apply(l, &d.center),
                radius: d.radius,
            }),
        }
    }

    fn pieces(&self, x: &[f64]) -> Vec<Piece> {
        let p = chart_point(x[0], x[1]);
        let w = p[2];
        let mut out = Vec::with_capacity(self.sides.len() + 1);
        for m in &self.sides {
            let q = mink(&p, m);
            let s = 1.0 / (1.0 + q * q).sqrt();
            out.push((
                q.asinh(),
                vec![(m[0] - m[2] * x[0] / w) * s, (m[1] - m[2] * x[1] / w) * s],
            ));
        }
        if let Some(d) = &self.disk {
            let c = &d.center;
            let q = -mink(&p, c);
            let g = [c[2] * x[0] / w - c[0], c[2] * x[1] / w - c[1]];
            let gap = (q * q - 1.0).max(0.0).sqrt();
            let grad = if gap < 1e-14 {
                vec![0.0, 0.0]
            } else {
                vec![-g[0] / gap, -g[1] / gap]
            };
            out.push((d.radius - q.max(1.0).acosh(), grad));
        }
        out
    }

    /// Boundary as a closed polyline in the Poincaré disk, traced radially from
    /// an interior point.
    pub fn boundary_polyline(&self, from: &Vec3, n: usize) -> Vec<[f64; 2]> {
        let to = isometry_to_origin(from);
        let back = inverse_lorentz(&to);
        let local = self.transformed(&to);
        (0..n)
            .map(|i| {
                let th = std::f64::consts::TAU * i as f64 / n as f64;
                let (s, c) = th.sin_cos();
                let (mut lo, mut hi) = (0.0, 1.0 - 1e-9);
                if local.contains(&from_poincare([hi * c, hi * s]), 0.0) {
                    lo = hi;
                }
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if local.contains(&from_poincare([mid * c, mid * s]), 0.0) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                to_poincare(&apply(&back, &from_poincare([lo * c, lo * s])))
            })
            .collect()
    }
}

/// Inverse of a Lorentz matrix: `J Lᵀ J`.
pub fn inverse_lorentz(l: &Mat3) -> Mat3 {
    let j = [1.0, 1.0, -1.0];
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for k in 0..3 {
            out[i][k] = j[i] * l[k][i] * j[k];
        }
    }
    out
}

/// Euclidean centre and radius of the hyperbolic circle in the Poincaré disk.
pub fn poincare_circle(center: &Vec3, r: f64) -> ([f64; 2], f64) {
    let s0 = center[2].max(1.0).acosh();
    let phi = center[1].atan2(center[0]);
    let a = ((s0 - r) / 2.0).tanh();
    let b = ((s0 + r) / 2.0).tanh();
    let m = 0.5 * (a + b);
    ([m * phi.cos(), m * phi.sin()], 0.5 * (b - a))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypInradius {
    pub r: f64,
    pub center: Vec3,
    pub poincare: [f64; 2],
}

/// Inradii above this are reported as unbounded.
pub const MAX_INRADIUS: f64 = 30.0;

/// Largest inscribed disk, by multistart minimax over a global chart.
pub fn hyperbolic_inradius(region: &HyperbolicRegion) -> Result<HypInradius, NonEuclidError> {
    let (base, reach) = match &region.disk {
        Some(d) => (d.center, d.radius),
        None => (origin(), 6.0),
    };
    let to_base = inverse_lorentz(&isometry_to_origin(&base));
    // polar grid of starts about the base point
    let mut starts: Vec<(f64, Vec3)> = Vec::new();
    for k in 0..=12 {
        let s = reach * k as f64 / 12.0;
        let m = if k == 0 { 1 } else { 24 };
        for a in 0..m {
            let phi = std::f64::consts::TAU * (a as f64 + 0.5 * (k % 2) as f64) / m as f64;
            let p = apply(&to_base, &point_at(phi, s));
            starts.push((region.depth(&p), p));
        }
    }
    starts.sort_by(|a, b| b.0.total_cmp(&a.0));
    let opts = MinimaxOptions::default();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for (_, p) in starts.iter().take(8) {
        let res = maximize_min(|x| region.pieces(x), vec![p[0], p[1]], opts);
        if best.as_ref().is_none_or(|b| res.value > b.0 + 1e-13) {
            best = Some((res.value, res.x));
        }
    }
    let (_, x) = best.ok_or(NonEuclidError::Empty)?;
    let center = chart_point(x[0], x[1]);
    let r = region.depth(&center);
    if r < -OPT_TOL {
        return Err(NonEuclidError::Empty);
    }
    if r > MAX_INRADIUS {
        return Err(NonEuclidError::Invalid(format!(
            "inradius exceeds {MAX_INRADIUS}; region looks unbounded"
        )));
    }
    Ok(HypInradius {
        r: r.max(0.0),
        center,
        poincare: to_poincare(&center),
    })
}

/// Distance from the origin to the sides of the regular hexagon inscribed in
/// the circle of radius `rho`.
pub fn hexagon_side_distance(rho: f64) -> f64 {
    (rho.tanh() * (std::f64::consts::PI / 6.0).cos()).atanh()
}

/// Two convex sets covering the disk of radius `rho`: the disk minus the caps
/// cut off by alternate hexagon-parallel geodesics at distance
/// `h = h_hex + t (rho - h_hex)` from the centre, `t ∈ [0, 1]`.
pub fn hexagon_cover(rho: f64, t: f64) -> Result<[HyperbolicRegion; 2], NonEuclidError> {
    if !(rho > 0.0) || !(0.0..=1.0).contains(&t) {
        return Err(NonEuclidError::Invalid(format!(
            "need rho > 0 and t in [0,1], got {rho}, {t}"
        )));
    }
    let hh = hexagon_side_distance(rho);
    let h = hh + t * (rho - hh);
    let make = |parity: usize| -> Result<HyperbolicRegion, NonEuclidError> {
        let mut r = HyperbolicRegion::disk(rho)?;
        for i in (parity..6).step_by(2) {
            let phi = (60.0 * i as f64 + 30.0).to_radians();
            r = r.with_side(geodesic_normal(phi, h))?;
        }
        Ok(r)
    };
    Ok([make(1)?, make(0)?])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverConfig {
    pub rho: f64,
    pub t: f64,
    pub h: f64,
    pub shapes: [HyperbolicRegion; 2],
    pub inradii: [HypInradius; 2],
    /// `rho - (r_1 + r_2)`; positive means the Euclidean inequality fails.
    pub margin: f64,
    /// Both inscribed disks miss the centre of the big disk.
    pub excludes_center: bool,
}

pub fn evaluate_cover(rho: f64, t: f64) -> Result<CoverConfig, NonEuclidError> {
    let shapes = hexagon_cover(rho, t)?;
    let a = hyperbolic_inradius(&shapes[0])?;
    let b = hyperbolic_inradius(&shapes[1])?;
    let o = origin();
    let excludes_center = distance(&a.center, &o) > a.r && distance(&b.center, &o) > b.r;
    let hh = hexagon_side_distance(rho);
    Ok(CoverConfig {
        rho,
        t,
        h: hh + t * (rho - hh),
        margin: rho - a.r - b.r,
        inradii: [a, b],
        shapes,
        excludes_center,
    })
}

/// Points of the disk of radius `rho` in neither shape, on a polar grid.
pub fn cover_gaps(shapes: &[HyperbolicRegion], rho: f64, radial: usize, angular: usize) -> usize {
    let mut gaps = 0;
    for i in 0..=radial {
        let s = rho * i as f64 / radial as f64;
        for j in 0..angular {
            let p = point_at(std::f64::consts::TAU * j as f64 / angular as f64, s);
            if !shapes.iter().any(|c| c.contains(&p, 1e-9)) {
                gaps += 1;
            }
        }
    }
    gaps
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleReport {
    pub rho: f64,
    pub scan: Vec<(f64, f64)>,
    pub best: CoverConfig,
    /// Margin exceeds ten optimiser tolerances, disks miss the centre and the
    /// grid check finds no uncovered point.
    pub found: bool,
    pub gaps: usize,
}

/// Scans the hexagon family over `grid + 1` values of `t` and keeps the
/// largest margin.
pub fn hyperbolic_counterexample_search(
    rho: f64,
    grid: usize,
) -> Result<CounterexampleReport, NonEuclidError> {
    let grid = grid.max(1);
    let mut scan = Vec::new();
    let mut best: Option<CoverConfig> = None;
    for i in 0..=grid {
        let cfg = evaluate_cover(rho, i as f64 / grid as f64)?;
        scan.push((cfg.t, cfg.margin));
        if best.as_ref().is_none_or(|b| cfg.margin > b.margin) {
            best = Some(cfg);
        }
    }
    let best = best.expect("grid is non-empty");
    let gaps = cover_gaps(&best.shapes, rho, 200, 720);
    Ok(CounterexampleReport {
        rho,
        found: best.margin > 10.0 * OPT_TOL && best.excludes_center && gaps == 0,
        gaps,
        scan,
        best,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn model_round_trips() {
        let p = point_at(0.7, 1.3);
        assert!((mink(&p, &p) + 1.0).abs() < 1e-12);
        let q = from_poincare(to_poincare(&p));
        assert!(p.iter().zip(&q).all(|(a, b)| (a - b).abs() < 1e-12));
        assert!((distance(&p, &origin()) - 1.3).abs() < 1e-12);
        let m = geodesic_normal(0.7, 0.4);
        assert!((mink(&m, &m) - 1.0).abs() < 1e-12);
        assert!((mink(&p, &m).asinh() - (0.4 - 1.3)).abs() < 1e-12);
        let l = isometry_to_origin(&p);
        let o = apply(&l, &p);
        assert!(o[0].abs() < 1e-12 && o[1].abs() < 1e-12 && (o[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn disk_inradius_is_its_radius() {
        let r = hyperbolic_inradius(&HyperbolicRegion::disk(2.5).unwrap()).unwrap();
        assert!((r.r - 2.5).abs() < 1e-9, "{r:?}");
    }

    #[test]
    fn half_disk_inradius_is_half_the_radius() {
        for rho in [0.3, 1.0, 3.0] {
            let r = HyperbolicRegion::disk(rho)
                .unwrap()
                .with_side([0.0, 1.0, 0.0])
                .unwrap();
            let got = hyperbolic_inradius(&r).unwrap();
            assert!((got.r - rho / 2.0).abs() < 1e-9, "{rho}: {got:?}");
            assert!((got.poincare[1] - (rho / 4.0).tanh()).abs() < 1e-6);
        }
    }

    #[test]
    fn ideal_triangle_inradius() {
        let a = FRAC_PI_2;
        let tri =
            HyperbolicRegion::ideal_triangle([a, a + 2.0 * PI / 3.0, a + 4.0 * PI / 3.0]).unwrap();
        let r = hyperbolic_inradius(&tri).unwrap();
        assert!((r.r - 0.5 * 3f64.ln()).abs() < 1e-9, "{r:?}");
        // lopsided ideal triangles are all congruent
        let tri = HyperbolicRegion::ideal_triangle([0.1, 1.0, 4.0]).unwrap();
        assert!((hyperbolic_inradius(&tri).unwrap().r - 0.5 * 3f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn invariant_under_isometries() {
        let region = hexagon_cover(2.0, 0.3).unwrap()[0].clone();
        let l = matmul(&rotation(0.9), &boost(0.8));
        let a = hyperbolic_inradius(&region).unwrap().r;
        let b = hyperbolic_inradius(&region.transformed(&l)).unwrap().r;
        assert!((a - b).abs() < 1e-6, "{a} vs {b}");
    }

    #[test]
    fn inradius_dominates_grid_search() {
        let region = hexagon_cover(5.0, 0.0).unwrap()[0].clone();
        let r = hyperbolic_inradius(&region).unwrap().r;
        let mut best = f64::NEG_INFINITY;
        for i in 0..=300 {
            for j in 0..300 {
                let p = point_at(TAU_F * j as f64 / 300.0, 5.0 * i as f64 / 300.0);
                best = best.max(region.depth(&p));
            }
        }
        assert!(r >= best - 1e-12 && r - best < 2e-2, "{r} vs {best}");
    }
    const TAU_F: f64 = std::f64::consts::TAU;

    #[test]
    fn shapes_are_congruent_and_cover() {
        let cfg = evaluate_cover(3.0, 0.2).unwrap();
        assert!((cfg.inradii[0].r - cfg.inradii[1].r).abs() < 1e-9);
        assert_eq!(cover_gaps(&cfg.shapes, 3.0, 60, 360), 0);
    }

    #[test]
    fn large_disk_breaks_the_euclidean_inequality() {
        let rep = hyperbolic_counterexample_search(5.0, 4).unwrap();
        assert!(rep.found, "{:?}", rep.scan);
        assert!(rep.best.margin > 0.0);
    }

    #[test]
    fn small_disk_behaves_euclidean() {
        let rep = hyperbolic_counterexample_search(0.1, 4).unwrap();
        assert!(!rep.found);
        assert!(rep.best.margin < 0.0, "{:?}", rep.scan);
    }

    #[test]
    fn circle_in_the_poincare_disk() {
        let (c, r) = poincare_circle(&origin(), 1.0);
        assert!(c[0].abs() < 1e-15 && (r - 0.5f64.tanh()).abs() < 1e-15);
        let p = point_at(0.4, 1.5);
        let (c, rr) = poincare_circle(&p, 0.5);
        // a point of the hyperbolic circle lies on the Euclidean one
        let q = apply(
            &inverse_lorentz(&isometry_to_origin(&p)),
            &point_at(2.0, 0.5),
        );
        let z = to_poincare(&q);
        assert!(((z[0] - c[0]).hypot(z[1] - c[1]) - rr).abs() < 1e-12);
    }

    #[test]
    fn polyline_traces_the_half_disk() {
        let r = HyperbolicRegion::disk(1.0)
            .unwrap()
            .with_side([0.0, 1.0, 0.0])
            .unwrap();
        let c = hyperbolic_inradius(&r).unwrap().center;
        let pts = r.boundary_polyline(&c, 64);
        assert_eq!(pts.len(), 64);
        for z in pts {
            let p = from_poincare(z);
            assert!(r.depth(&p).abs() < 1e-9);
        }
    }
}

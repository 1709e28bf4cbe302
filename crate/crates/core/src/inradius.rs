//! Relative inradius `r_B(C)`: the largest `h >= 0` such that a translate of
//! `hB` fits inside `C`, with `-inf` for empty `C`.
//!
//! Containment `hB + t ⊆ C` is linear in `(t, h)` once the support function of
//! `B` is known along each row normal of `C`:
//! `n_j·t + h·σ_B(n_j) <= b_j` for every row `j`. A single LP then gives the
//! optimum together with a witness translation.

use serde::{Deserialize, Serialize};

use crate::error::GeomError;
use crate::geom::{dot, HPolyhedron, Halfspace, EPS_GEO};
use crate::lp::{LpOutcome, LpProblem};

/// A bounded convex polyhedron with nonempty interior.
#[derive(Clone, Debug, PartialEq)]
pub struct Body(HPolyhedron);

impl Body {
    pub fn new(p: HPolyhedron) -> Result<Self, GeomError> {
        if p.is_empty() || p.has_empty_interior() || !p.is_bounded() {
            return Err(GeomError::NotABody);
        }
        Ok(Self(p))
    }

    pub fn polyhedron(&self) -> &HPolyhedron {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn support(&self, u: &[f64]) -> f64 {
        self.0
            .support(u)
            .expect("support of a validated body is finite")
    }
}

impl AsRef<HPolyhedron> for Body {
    fn as_ref(&self) -> &HPolyhedron {
        &self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum InradiusStatus {
    Finite,
    Empty,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InradiusResult {
    /// `-inf` for empty, `+inf` for unbounded.
    pub h: f64,
    pub witness: Option<Vec<f64>>,
    pub status: InradiusStatus,
}

impl InradiusResult {
    fn empty() -> Self {
        Self {
            h: f64::NEG_INFINITY,
            witness: None,
            status: InradiusStatus::Empty,
        }
    }

    fn unbounded() -> Self {
        Self {
            h: f64::INFINITY,
            witness: None,
            status: InradiusStatus::Unbounded,
        }
    }

    /// Checks `n_j·t + h·σ_B(n_j) <= b_j + tol` for every row of `c`.
    pub fn witness_holds(&self, body: &Body, c: &HPolyhedron, tol: f64) -> bool {
        match (&self.status, &self.witness) {
            (InradiusStatus::Finite, Some(t)) => c.halfspaces().iter().all(|hs| {
                dot(hs.normal(), t) + self.h * body.support(hs.normal()) <= hs.bound() + tol
            }),
            (InradiusStatus::Finite, None) => false,
            _ => true,
        }
    }
}

fn inradius_rows<'a>(body: &Body, rows: impl Iterator<Item = (&'a [f64], f64)>) -> InradiusResult {
    let d = body.dim();
    let mut obj = vec![0.0; d + 1];
    obj[d] = 1.0;
    let mut lp = LpProblem::maximize(obj);
    for (normal, bound) in rows {
        let mut row = normal.to_vec();
        row.push(body.support(normal));
        lp.leq(row, bound);
    }
    let mut nonneg = vec![0.0; d + 1];
    nonneg[d] = -1.0;
    lp.leq(nonneg, 0.0);
    match lp.solve() {
        LpOutcome::Optimal { value, mut point } => {
            point.truncate(d);
            InradiusResult {
                h: value.max(0.0),
                witness: Some(point),
                status: InradiusStatus::Finite,
            }
        }
        LpOutcome::Unbounded => InradiusResult::unbounded(),
        LpOutcome::Infeasible => InradiusResult::empty(),
    }
}

/// `r_B(C)` with a witness translation.
pub fn relative_inradius(body: &Body, c: &HPolyhedron) -> Result<InradiusResult, GeomError> {
    if c.dim() != body.dim() {
        return Err(GeomError::DimensionMismatch {
            expected: body.dim(),
            got: c.dim(),
        });
    }
    Ok(inradius_rows(
        body,
        c.halfspaces().iter().map(|h| (h.normal(), h.bound())),
    ))
}

/// Rows of a polyhedron whose right-hand sides are shifted by an offset
/// vector: `n_j·x <= b_j - y_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct OffsetFamily {
    dim: usize,
    base: Vec<Halfspace>,
}

impl OffsetFamily {
    pub fn new(dim: usize, base: Vec<Halfspace>) -> Self {
        Self { dim, base }
    }

    pub fn from_polyhedron(c: &HPolyhedron) -> Self {
        Self::new(c.dim(), c.halfspaces().to_vec())
    }

    /// Concatenates the rows of several polyhedra, so that translating part
    /// `i` by `t_i` becomes an offset (see [`OffsetFamily::translation_offsets`]).
    pub fn from_translates(parts: &[HPolyhedron]) -> Self {
        let dim = parts.first().map_or(0, |p| p.dim());
        let base = parts
            .iter()
            .flat_map(|p| p.halfspaces().iter().cloned())
            .collect();
        Self { dim, base }
    }

    /// Offsets realizing `∩ (C_i + t_i)` for a family built by `from_translates`.
    pub fn translation_offsets(parts: &[HPolyhedron], translations: &[Vec<f64>]) -> Vec<f64> {
        parts
            .iter()
            .zip(translations)
            .flat_map(|(p, t)| p.halfspaces().iter().map(move |h| -dot(h.normal(), t)))
            .collect()
    }

    pub fn rows(&self) -> usize {
        self.base.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn at(&self, offsets: &[f64]) -> HPolyhedron {
        assert_eq!(offsets.len(), self.base.len());
        let hs = self
            .base
            .iter()
            .zip(offsets)
            .map(|(h, y)| h.with_bound(h.bound() - y))
            .collect();
        HPolyhedron::new(self.dim, hs)
    }
}

/// `r_B(C(ȳ))` where `C(ȳ)` shifts each row bound by `-y_j`.
pub fn inradius_at_offset(
    body: &Body,
    family: &OffsetFamily,
    offsets: &[f64],
) -> Result<f64, GeomError> {
    if family.dim() != body.dim() {
        return Err(GeomError::DimensionMismatch {
            expected: body.dim(),
            got: family.dim(),
        });
    }
    if offsets.len() != family.rows() {
        return Err(GeomError::DimensionMismatch {
            expected: family.rows(),
            got: offsets.len(),
        });
    }
    let rows = family
        .base
        .iter()
        .zip(offsets)
        .map(|(h, y)| (h.normal(), h.bound() - y));
    Ok(inradius_rows(body, rows).h)
}

/// `r(mid) - (r(ȳ1) + r(ȳ2))/2`; concavity makes this nonnegative.
///
/// Returns `+inf` when an endpoint is `-inf` (vacuous) or when the midpoint is
/// `+inf`, and `-inf` when an endpoint is `+inf` but the midpoint is not.
pub fn concavity_residual(
    body: &Body,
    family: &OffsetFamily,
    y1: &[f64],
    y2: &[f64],
) -> Result<f64, GeomError> {
    let r1 = inradius_at_offset(body, family, y1)?;
    let r2 = inradius_at_offset(body, family, y2)?;
    if r1 == f64::NEG_INFINITY || r2 == f64::NEG_INFINITY {
        return Ok(f64::INFINITY);
    }
    let mid: Vec<f64> = y1.iter().zip(y2).map(|(a, b)| 0.5 * (a + b)).collect();
    let rm = inradius_at_offset(body, family, &mid)?;
    if rm == f64::INFINITY {
        return Ok(f64::INFINITY);
    }
    if r1 == f64::INFINITY || r2 == f64::INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(rm - 0.5 * (r1 + r2))
}

/// Default witness tolerance used by callers.
pub const WITNESS_TOL: f64 = EPS_GEO;

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> Body {
        Body::new(HPolyhedron::from_box(&[0.0, 0.0], &[1.0, 1.0])).unwrap()
    }

    #[test]
    fn identity_case() {
        let b = Body::new(HPolyhedron::from_box(&[-1.0, -1.0], &[1.0, 1.0])).unwrap();
        let r = relative_inradius(&b, b.polyhedron()).unwrap();
        assert_eq!(r.status, InradiusStatus::Finite);
        assert!((r.h - 1.0).abs() < 1e-12);
        let t = r.witness.as_ref().unwrap();
        assert!(t.iter().all(|v| v.abs() < 1e-12));
        assert!(r.witness_holds(&b, b.polyhedron(), WITNESS_TOL));
    }

    #[test]
    fn half_square() {
        let b = unit_square();
        let c = HPolyhedron::from_box(&[0.0, 0.0], &[0.5, 1.0]);
        let r = relative_inradius(&b, &c).unwrap();
        assert!((r.h - 0.5).abs() < 1e-12);
        assert!(r.witness_holds(&b, &c, WITNESS_TOL));
    }

    #[test]
    fn empty_is_neg_infinity() {
        let b = unit_square();
        let c = HPolyhedron::from_rows(2, vec![(vec![1.0, 0.0], -1.0), (vec![-1.0, 0.0], -1.0)])
            .unwrap();
        let r = relative_inradius(&b, &c).unwrap();
        assert_eq!(r.status, InradiusStatus::Empty);
        assert_eq!(r.h, f64::NEG_INFINITY);
    }

    #[test]
    fn quadrant_is_unbounded() {
        let b = unit_square();
        let c = HPolyhedron::from_rows(2, vec![(vec![-1.0, 0.0], 0.0), (vec![0.0, -1.0], 0.0)])
            .unwrap();
        let r = relative_inradius(&b, &c).unwrap();
        assert_eq!(r.status, InradiusStatus::Unbounded);
        assert_eq!(r.h, f64::INFINITY);
    }

    #[test]
    fn degenerate_cell_gives_zero() {
        let b = unit_square();
        let seg = HPolyhedron::from_box(&[0.0, 0.0], &[0.0, 1.0]);
        let r = relative_inradius(&b, &seg).unwrap();
        assert_eq!(r.status, InradiusStatus::Finite);
        assert!(r.h.abs() < 1e-12);
    }

    #[test]
    fn non_body_rejected() {
        let half = HPolyhedron::from_rows(2, vec![(vec![1.0, 0.0], 0.0)]).unwrap();
        assert_eq!(Body::new(half), Err(GeomError::NotABody));
        let seg = HPolyhedron::from_box(&[0.0, 0.0], &[0.0, 1.0]);
        assert_eq!(Body::new(seg), Err(GeomError::NotABody));
    }

    #[test]
    fn offset_examples() {
        let b = unit_square();
        let fam = OffsetFamily::from_polyhedron(b.polyhedron());
        let zero = vec![0.0; fam.rows()];
        let r0 = inradius_at_offset(&b, &fam, &zero).unwrap();
        assert!((r0 - relative_inradius(&b, b.polyhedron()).unwrap().h).abs() < 1e-12);
        // shrink every side by 1/4 -> [1/4, 3/4]^2, side 1/2
        let shrink = vec![0.25; fam.rows()];
        assert!((inradius_at_offset(&b, &fam, &shrink).unwrap() - 0.5).abs() < 1e-12);
        let direct = relative_inradius(&b, &HPolyhedron::from_box(&[0.25, 0.25], &[0.75, 0.75]))
            .unwrap()
            .h;
        assert!((direct - 0.5).abs() < 1e-12);
        let broken = vec![0.75; fam.rows()];
        assert_eq!(
            inradius_at_offset(&b, &fam, &broken).unwrap(),
            f64::NEG_INFINITY
        );
    }

    #[test]
    fn residual_of_equal_offsets_is_zero() {
        let b = unit_square();
        let fam = OffsetFamily::from_polyhedron(b.polyhedron());
        let y = vec![0.1, -0.2, 0.05, 0.0];
        assert!(concavity_residual(&b, &fam, &y, &y).unwrap().abs() < 1e-12);
        let bad = vec![0.9; 4];
        assert_eq!(
            concavity_residual(&b, &fam, &y, &bad).unwrap(),
            f64::INFINITY
        );
    }
}

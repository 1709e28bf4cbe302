//! Small hand-built partitions with known answers.

use crate::geom::HPolyhedron;
use crate::inradius::Body;
use crate::partition::{restrict, Ambient, CellSet};
use crate::polygon::PolygonV;

pub fn unit_square() -> PolygonV {
    PolygonV::new(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).expect("square")
}

fn body_of(b: &PolygonV) -> Body {
    Body::new(b.to_hpolyhedron()).expect("polygon is a body")
}

fn rows(r: Vec<([f64; 2], f64)>) -> HPolyhedron {
    HPolyhedron::from_rows(2, r.into_iter().map(|(n, b)| (n.to_vec(), b)).collect())
        .expect("finite rows")
}

/// Partition of space into vertical slabs at the interior cut positions.
pub fn slabs_space(cuts: &[f64]) -> CellSet {
    let k = cuts.len() + 1;
    let cells = (0..k)
        .map(|i| {
            let mut r = Vec::new();
            if i > 0 {
                r.push(([-1.0, 0.0], -cuts[i - 1]));
            }
            if i < cuts.len() {
                r.push(([1.0, 0.0], cuts[i]));
            }
            rows(r)
        })
        .collect();
    CellSet::new(2, cells, Ambient::Space)
}

/// `k` vertical slabs of the unit square with the given widths (summing to 1).
pub fn slabs(widths: &[f64]) -> (Body, CellSet) {
    let mut cuts = Vec::new();
    let mut acc = 0.0;
    for w in &widths[..widths.len() - 1] {
        acc += w;
        cuts.push(acc);
    }
    let body = body_of(&unit_square());
    let cells = restrict(&slabs_space(&cuts), &body);
    (body, cells)
}

/// `k` equal slabs of the unit square.
pub fn equal_slabs(k: usize) -> (Body, CellSet) {
    slabs(&vec![1.0 / k as f64; k])
}

/// Unit square cut by the vertical line `x = c`.
pub fn square_split(c: f64) -> (PolygonV, CellSet) {
    let b = unit_square();
    let cells = restrict(&slabs_space(&[c]), &body_of(&b));
    (b, cells)
}

/// Unit square cut through its centre into SW, SE, NE, NW quadrants.
pub fn square_quadrants() -> (PolygonV, CellSet) {
    let b = unit_square();
    let q = |sx: f64, sy: f64| rows(vec![([sx, 0.0], 0.5 * sx), ([0.0, sy], 0.5 * sy)]);
    let space = CellSet::new(
        2,
        vec![q(1.0, 1.0), q(-1.0, 1.0), q(-1.0, -1.0), q(1.0, -1.0)],
        Ambient::Space,
    );
    let cells = restrict(&space, &body_of(&b));
    (b, cells)
}

/// Unit square around the centre square `[1/3, 2/3]^2`; four rectangles wind
/// around it (bottom, right, top, left), the centre is cell 4.
pub fn pinwheel() -> (PolygonV, CellSet) {
    let b = unit_square();
    let (l, h) = (1.0 / 3.0, 2.0 / 3.0);
    let space = CellSet::new(
        2,
        vec![
            rows(vec![([0.0, 1.0], l), ([-1.0, 0.0], -l)]),
            rows(vec![([-1.0, 0.0], -h), ([0.0, -1.0], -l)]),
            rows(vec![([0.0, -1.0], -h), ([1.0, 0.0], h)]),
            rows(vec![([1.0, 0.0], l), ([0.0, 1.0], h)]),
            rows(vec![
                ([1.0, 0.0], h),
                ([-1.0, 0.0], -l),
                ([0.0, 1.0], h),
                ([0.0, -1.0], -l),
            ]),
        ],
        Ambient::Space,
    );
    let cells = restrict(&space, &body_of(&b));
    (b, cells)
}

/// Unit square cut by the segments `(0.3,0)-(0.1,1)` and `(0.7,0)-(0.9,1)`;
/// the two cuts converge below the square.
pub fn slanted_strip() -> (PolygonV, CellSet) {
    let b = unit_square();
    let space = CellSet::new(
        2,
        vec![
            rows(vec![([1.0, 0.2], 0.3)]),
            rows(vec![([-1.0, -0.2], -0.3), ([1.0, -0.2], 0.7)]),
            rows(vec![([-1.0, 0.2], -0.7)]),
        ],
        Ambient::Space,
    );
    let cells = restrict(&space, &body_of(&b));
    (b, cells)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polygon::{polygon_from_hrep, Rect};

    fn areas(cells: &CellSet) -> Vec<f64> {
        let r = Rect::square(2.0);
        cells
            .cells()
            .iter()
            .map(|c| polygon_from_hrep(c, &r).map(|p| p.area()).unwrap_or(0.0))
            .collect()
    }

    #[test]
    fn fixtures_tile_the_square() {
        for cells in [
            slabs(&[0.2, 0.3, 0.5]).1,
            square_split(0.5).1,
            square_quadrants().1,
            pinwheel().1,
            slanted_strip().1,
        ] {
            let total: f64 = areas(&cells).iter().sum();
            assert!((total - 1.0).abs() < 1e-12, "{total}");
        }
        let p = areas(&pinwheel().1);
        assert!((p[4] - 1.0 / 9.0).abs() < 1e-12);
        for a in &p[..4] {
            assert!((a - 2.0 / 9.0).abs() < 1e-12);
        }
    }
}

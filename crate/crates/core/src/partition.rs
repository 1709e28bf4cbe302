//! Affine (generalized Voronoi) partitions, hierarchical partitions given by
//! graded trees, and their flattening into a single affine partition.

use serde::{Deserialize, Serialize};

use crate::error::GeomError;
use crate::geom::{dot, sub, AffineFunc, HPolyhedron, EPS_GEO};
use crate::inradius::Body;
use crate::polygon::{hausdorff, polygon_from_hrep, Rect};

/// Ordered list of affine functions `λ_1 … λ_k` (k >= 1).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineSpec {
    funcs: Vec<AffineFunc>,
}

impl AffineSpec {
    pub fn new(funcs: Vec<AffineFunc>) -> Result<Self, GeomError> {
        let Some(first) = funcs.first() else {
            return Err(GeomError::Invalid("affine partition needs k >= 1".into()));
        };
        let d = first.dim();
        if let Some(f) = funcs.iter().find(|f| f.dim() != d) {
            return Err(GeomError::DimensionMismatch {
                expected: d,
                got: f.dim(),
            });
        }
        Ok(Self { funcs })
    }

    pub fn funcs(&self) -> &[AffineFunc] {
        &self.funcs
    }

    pub fn len(&self) -> usize {
        self.funcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.funcs.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.funcs[0].dim()
    }

    /// Index pairs of identical functions; their cells coincide.
    pub fn duplicates(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.funcs.len() {
            for j in i + 1..self.funcs.len() {
                if self.funcs[i] == self.funcs[j] {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Ambient {
    Space,
    Body(Body),
}

/// Indexed family of convex cells. Empty cells are kept so indices stay stable.
#[derive(Clone, Debug, PartialEq)]
pub struct CellSet {
    dim: usize,
    cells: Vec<HPolyhedron>,
    ambient: Ambient,
}

/// Outcome of a sampled partition check.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PartitionCheck {
    pub samples: usize,
    /// Samples outside every cell (beyond tolerance).
    pub uncovered: usize,
    /// Samples strictly inside two or more cells.
    pub overlapping: usize,
}

impl PartitionCheck {
    pub fn ok(&self) -> bool {
        self.uncovered == 0 && self.overlapping == 0
    }
}

impl CellSet {
    pub fn new(dim: usize, cells: Vec<HPolyhedron>, ambient: Ambient) -> Self {
        Self {
            dim,
            cells,
            ambient,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cells(&self) -> &[HPolyhedron] {
        &self.cells
    }

    pub fn cell(&self, i: usize) -> &HPolyhedron {
        &self.cells[i]
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn ambient(&self) -> &Ambient {
        &self.ambient
    }

    /// Empty-set marker of cell `i`.
    pub fn is_cell_empty(&self, i: usize) -> bool {
        self.cells[i].is_empty()
    }

    /// Indices of cells containing `x` within `tol`.
    pub fn cells_containing(&self, x: &[f64], tol: f64) -> Vec<usize> {
        (0..self.cells.len())
            .filter(|&i| self.cells[i].contains(x, tol))
            .collect()
    }

    /// Coverage and interior-disjointness on the given sample points.
    pub fn check_partition(&self, samples: &[Vec<f64>], tol: f64) -> PartitionCheck {
        let mut out = PartitionCheck {
            samples: samples.len(),
            ..Default::default()
        };
        for x in samples {
            if let Ambient::Body(b) = &self.ambient {
                if !b.polyhedron().contains(x, -tol) {
                    continue;
                }
            }
            let mut covered = false;
            let mut strict = 0;
            for c in &self.cells {
                let s = c.slack(x);
                if s >= -tol {
                    covered = true;
                }
                if s > tol {
                    strict += 1;
                }
            }
            if !covered {
                out.uncovered += 1;
            }
            if strict >= 2 {
                out.overlapping += 1;
            }
        }
        out
    }
}

/// `V_i = {x : λ_i(x) <= λ_j(x) for all j != i}`.
pub fn build_affine_cells(spec: &AffineSpec) -> CellSet {
    let d = spec.dim();
    let f = spec.funcs();
    let cells = (0..f.len())
        .map(|i| {
            let rows = (0..f.len())
                .filter(|&j| j != i)
                .map(|j| {
                    (
                        sub(&f[i].gradient, &f[j].gradient),
                        f[j].offset - f[i].offset,
                    )
                })
                .collect();
            HPolyhedron::from_rows(d, rows).expect("dimensions validated by AffineSpec")
        })
        .collect();
    CellSet::new(d, cells, Ambient::Space)
}

/// `λ_i(x) = -2 p_i·x + |p_i|^2`, whose affine cells are the Voronoi cells.
pub fn voronoi_functions(sites: &[Vec<f64>]) -> Result<AffineSpec, GeomError> {
    power_functions(sites, &vec![0.0; sites.len()])
}

/// Power-diagram functions `λ_i(x) = -2 p_i·x + |p_i|^2 - w_i`.
pub fn power_functions(sites: &[Vec<f64>], weights: &[f64]) -> Result<AffineSpec, GeomError> {
    AffineSpec::new(
        sites
            .iter()
            .zip(weights)
            .map(|(p, w)| AffineFunc::new(p.iter().map(|v| -2.0 * v).collect(), dot(p, p) - w))
            .collect(),
    )
}

/// Drops `λ_i`; every remaining cell can only grow.
pub fn remove_function(spec: &AffineSpec, i: usize) -> Result<AffineSpec, GeomError> {
    if i >= spec.len() {
        return Err(GeomError::IndexOutOfRange {
            index: i,
            len: spec.len(),
        });
    }
    if spec.len() < 2 {
        return Err(GeomError::Invalid("cannot remove the only function".into()));
    }
    let mut funcs = spec.funcs.clone();
    funcs.remove(i);
    AffineSpec::new(funcs)
}

/// Rooted tree with an affine function per vertex; leaves are cells.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionTree {
    pub func: AffineFunc,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<PartitionTree>,
}

impl PartitionTree {
    pub fn leaf(func: AffineFunc) -> Self {
        Self {
            func,
            children: Vec::new(),
        }
    }

    pub fn node(func: AffineFunc, children: Vec<PartitionTree>) -> Self {
        Self { func, children }
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.func.dim()
    }

    pub fn leaf_count(&self) -> usize {
        if self.is_leaf() {
            1
        } else {
            self.children.iter().map(|c| c.leaf_count()).sum()
        }
    }

    pub fn depth(&self) -> usize {
        self.children
            .iter()
            .map(|c| 1 + c.depth())
            .max()
            .unwrap_or(0)
    }

    /// All leaves at the same depth.
    pub fn is_graded(&self) -> bool {
        fn leaf_depths(t: &PartitionTree, d: usize, out: &mut Vec<usize>) {
            if t.is_leaf() {
                out.push(d);
            }
            for c in &t.children {
                leaf_depths(c, d + 1, out);
            }
        }
        let mut depths = Vec::new();
        leaf_depths(self, 0, &mut depths);
        depths.windows(2).all(|w| w[0] == w[1])
    }

    /// Internal vertices need two or more children and a common dimension.
    pub fn validate(&self) -> Result<(), GeomError> {
        let d = self.dim();
        fn walk(t: &PartitionTree, d: usize) -> Result<(), GeomError> {
            if t.func.dim() != d {
                return Err(GeomError::DimensionMismatch {
                    expected: d,
                    got: t.func.dim(),
                });
            }
            if t.children.len() == 1 {
                return Err(GeomError::InvalidTree(
                    "internal vertex with a single child".into(),
                ));
            }
            t.children.iter().try_for_each(|c| walk(c, d))
        }
        walk(self, d)
    }

    /// Root-to-leaf chains of functions, leaves in depth-first order.
    fn chains(&self) -> Vec<Vec<&AffineFunc>> {
        fn walk<'a>(
            t: &'a PartitionTree,
            path: &mut Vec<&'a AffineFunc>,
            out: &mut Vec<Vec<&'a AffineFunc>>,
        ) {
            path.push(&t.func);
            if t.is_leaf() {
                out.push(path.clone());
            }
            for c in &t.children {
                walk(c, path, out);
            }
            path.pop();
        }
        let mut out = Vec::new();
        walk(self, &mut Vec::new(), &mut out);
        out
    }
}

/// Default weight for [`flatten_tree`].
pub const DEFAULT_FLATTEN_EPS: f64 = 1e-3;

/// `λ_{i,ε} = λ_{v_0} + ε λ_{v_1} + … + ε^m λ_{v_m}` along each root-to-leaf chain.
pub fn flatten_tree(tree: &PartitionTree, eps: f64) -> Result<AffineSpec, GeomError> {
    if !(eps > 0.0) {
        return Err(GeomError::Invalid(
            "flattening weight must be positive".into(),
        ));
    }
    tree.validate()?;
    if !tree.is_graded() {
        return Err(GeomError::InvalidTree("tree is not graded".into()));
    }
    let depth = tree.depth();
    if eps.powi(depth as i32) < crate::geom::EPS_LP {
        log::warn!(
            "flattening weight {eps} at depth {depth} gives {:e}, below LP tolerance",
            eps.powi(depth as i32)
        );
    }
    let funcs = tree
        .chains()
        .into_iter()
        .map(|chain| {
            let mut acc = AffineFunc::zero(tree.dim());
            let mut w = 1.0;
            for f in chain {
                acc = acc.plus(&f.scaled(w));
                w *= eps;
            }
            acc
        })
        .collect();
    AffineSpec::new(funcs)
}

/// Leaf cells: `λ_v <= λ_w` for every ancestor-or-self `v` of the leaf and
/// every sibling `w` of `v`.
pub fn hierarchical_cells(tree: &PartitionTree) -> Result<CellSet, GeomError> {
    tree.validate()?;
    let d = tree.dim();
    let mut cells = Vec::new();
    fn walk(
        t: &PartitionTree,
        rows: &mut Vec<(Vec<f64>, f64)>,
        d: usize,
        out: &mut Vec<HPolyhedron>,
    ) {
        if t.is_leaf() {
            out.push(HPolyhedron::from_rows(d, rows.clone()).expect("validated dimension"));
            return;
        }
        for (i, v) in t.children.iter().enumerate() {
            let added = t.children.len() - 1;
            for (j, w) in t.children.iter().enumerate() {
                if i != j {
                    rows.push((
                        sub(&v.func.gradient, &w.func.gradient),
                        w.func.offset - v.func.offset,
                    ));
                }
            }
            walk(v, rows, d, out);
            rows.truncate(rows.len() - added);
        }
    }
    walk(tree, &mut Vec::new(), d, &mut cells);
    Ok(CellSet::new(d, cells, Ambient::Space))
}

/// `C_i = V_i ∩ B`.
pub fn restrict(cells: &CellSet, body: &Body) -> CellSet {
    let restricted = cells
        .cells()
        .iter()
        .map(|c| c.intersect(body.polyhedron()))
        .collect();
    CellSet::new(cells.dim(), restricted, Ambient::Body(body.clone()))
}

/// Largest per-index Hausdorff distance between the cells clipped to `bounds`
/// (planar only). A cell empty in one set but not the other gives `+inf`.
pub fn hausdorff_cells(a: &CellSet, b: &CellSet, bounds: &Rect) -> Result<f64, GeomError> {
    if a.len() != b.len() {
        return Err(GeomError::CellCountMismatch(a.len(), b.len()));
    }
    if a.dim() != 2 || b.dim() != 2 {
        return Err(GeomError::RequiresDimension(2));
    }
    let mut worst: f64 = 0.0;
    for (ca, cb) in a.cells().iter().zip(b.cells()) {
        let pa = polygon_from_hrep(ca, bounds);
        let pb = polygon_from_hrep(cb, bounds);
        let d = match (pa, pb) {
            (Ok(pa), Ok(pb)) => hausdorff(&pa, &pb),
            (Err(_), Err(_)) => 0.0,
            _ => f64::INFINITY,
        };
        worst = worst.max(d);
    }
    Ok(worst)
}

/// Tolerance used for sampled partition checks.
pub const PARTITION_TOL: f64 = EPS_GEO;

#[cfg(test)]
mod tests {
    use super::*;

    fn lin(g: &[f64], b: f64) -> AffineFunc {
        AffineFunc::new(g.to_vec(), b)
    }

    #[test]
    fn single_function_is_whole_space() {
        let cells = build_affine_cells(&AffineSpec::new(vec![lin(&[1.0, 2.0], 3.0)]).unwrap());
        assert_eq!(cells.len(), 1);
        assert_eq!(cells.cell(0).len(), 0);
        assert!(!cells.cell(0).is_bounded());
    }

    #[test]
    fn one_dimensional_pair() {
        let spec = AffineSpec::new(vec![lin(&[1.0], 0.0), lin(&[-1.0], 0.0)]).unwrap();
        let cells = build_affine_cells(&spec);
        // x <= -x  <=>  x <= 0
        assert!(cells.cell(0).contains(&[-1.0], 0.0));
        assert!(!cells.cell(0).contains(&[1.0], 1e-9));
        assert!(cells.cell(1).contains(&[1.0], 0.0));
        assert!(!cells.cell(1).contains(&[-1.0], 1e-9));
    }

    #[test]
    fn voronoi_bisector() {
        let spec = voronoi_functions(&[vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap();
        let cells = build_affine_cells(&spec);
        let h = &cells.cell(0).halfspaces()[0];
        assert!((h.normal()[0] - 1.0).abs() < 1e-12);
        assert!((h.bound() - 0.5).abs() < 1e-12);
        let one = build_affine_cells(&voronoi_functions(&[vec![3.0, 4.0]]).unwrap());
        assert_eq!(one.cell(0).len(), 0);
    }

    #[test]
    fn voronoi_square_corners_brute_force() {
        let sites = vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
            vec![0.0, 1.0],
        ];
        let cells = build_affine_cells(&voronoi_functions(&sites).unwrap());
        for ix in 0..41 {
            for iy in 0..41 {
                let x = vec![
                    ix as f64 / 40.0 * 0.98 + 0.01,
                    iy as f64 / 40.0 * 0.98 + 0.01,
                ];
                if (x[0] - 0.5).abs() < 1e-9 || (x[1] - 0.5).abs() < 1e-9 {
                    continue;
                }
                let nearest = (0..4)
                    .min_by(|&a, &b| {
                        let da: f64 = sub(&x, &sites[a]).iter().map(|v| v * v).sum();
                        let db: f64 = sub(&x, &sites[b]).iter().map(|v| v * v).sum();
                        da.total_cmp(&db)
                    })
                    .unwrap();
                assert_eq!(cells.cells_containing(&x, 0.0), vec![nearest]);
            }
        }
    }

    #[test]
    fn remove_errors_and_whole_space() {
        let spec = AffineSpec::new(vec![lin(&[1.0], 0.0), lin(&[-1.0], 0.0)]).unwrap();
        assert_eq!(
            remove_function(&spec, 5),
            Err(GeomError::IndexOutOfRange { index: 5, len: 2 })
        );
        let rest = remove_function(&spec, 0).unwrap();
        assert_eq!(build_affine_cells(&rest).cell(0).len(), 0);
        let single = AffineSpec::new(vec![lin(&[1.0], 0.0)]).unwrap();
        assert!(remove_function(&single, 0).is_err());
    }

    #[test]
    fn remove_middle_collinear_site() {
        let sites = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![2.0, 0.0]];
        let spec = voronoi_functions(&sites).unwrap();
        let rest = build_affine_cells(&remove_function(&spec, 1).unwrap());
        // outer bisector of (0,0) and (2,0) is x = 1
        for (i, expect) in [(0usize, 1.0f64), (1, -1.0)] {
            let h = &rest.cell(i).halfspaces()[0];
            assert!((h.normal()[0] - expect).abs() < 1e-12);
            assert!((h.bound() - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn duplicates_reported() {
        let f = lin(&[1.0, 0.0], 0.0);
        let spec = AffineSpec::new(vec![f.clone(), lin(&[0.0, 1.0], 0.0), f]).unwrap();
        assert_eq!(spec.duplicates(), vec![(0, 2)]);
        let cells = build_affine_cells(&spec);
        assert_eq!(cells.cell(0), cells.cell(2));
    }

    fn quadrant_tree() -> PartitionTree {
        // split by x, then each half by y
        let z = AffineFunc::zero(2);
        let half = |s: f64| {
            PartitionTree::node(
                lin(&[s, 0.0], 0.0),
                vec![
                    PartitionTree::leaf(lin(&[0.0, 1.0], 0.0)),
                    PartitionTree::leaf(lin(&[0.0, -1.0], 0.0)),
                ],
            )
        };
        PartitionTree::node(z, vec![half(1.0), half(-1.0)])
    }

    #[test]
    fn hierarchical_quadrants() {
        let cells = hierarchical_cells(&quadrant_tree()).unwrap();
        assert_eq!(cells.len(), 4);
        let probes = [
            ([-0.5, -0.5], 0usize),
            ([-0.5, 0.5], 1),
            ([0.5, -0.5], 2),
            ([0.5, 0.5], 3),
        ];
        for (p, idx) in probes {
            assert_eq!(cells.cells_containing(&p, 0.0), vec![idx]);
        }
    }

    #[test]
    fn depth_one_tree_matches_affine() {
        let fs = vec![
            lin(&[1.0, 0.0], 0.2),
            lin(&[0.0, 1.0], -0.1),
            lin(&[-1.0, -1.0], 0.0),
        ];
        let tree = PartitionTree::node(
            AffineFunc::zero(2),
            fs.iter().cloned().map(PartitionTree::leaf).collect(),
        );
        let h = hierarchical_cells(&tree).unwrap();
        let a = build_affine_cells(&AffineSpec::new(fs.clone()).unwrap());
        let bounds = Rect::square(3.0);
        assert!(hausdorff_cells(&h, &a, &bounds).unwrap() < 1e-12);
        // flattening a single level scales every function by eps
        let flat = flatten_tree(&tree, 0.01).unwrap();
        for (g, f) in flat.funcs().iter().zip(&fs) {
            assert_eq!(g, &f.scaled(0.01));
        }
    }

    #[test]
    fn flatten_rejects_ungraded_and_bad_eps() {
        let t = PartitionTree::node(
            AffineFunc::zero(1),
            vec![
                PartitionTree::leaf(lin(&[1.0], 0.0)),
                PartitionTree::node(
                    lin(&[-1.0], 0.0),
                    vec![
                        PartitionTree::leaf(lin(&[1.0], 1.0)),
                        PartitionTree::leaf(lin(&[-1.0], 1.0)),
                    ],
                ),
            ],
        );
        assert!(matches!(
            flatten_tree(&t, 0.1),
            Err(GeomError::InvalidTree(_))
        ));
        assert!(flatten_tree(&quadrant_tree(), 0.0).is_err());
        let single = PartitionTree::node(
            AffineFunc::zero(1),
            vec![PartitionTree::leaf(lin(&[1.0], 0.0))],
        );
        assert!(matches!(single.validate(), Err(GeomError::InvalidTree(_))));
    }

    #[test]
    fn hausdorff_shifted_split() {
        let split = |delta: f64| {
            build_affine_cells(
                &AffineSpec::new(vec![lin(&[1.0, 0.0], -delta), lin(&[-1.0, 0.0], delta)]).unwrap(),
            )
        };
        let bounds = Rect::square(1.0);
        let a = split(0.0);
        assert_eq!(hausdorff_cells(&a, &a, &bounds).unwrap(), 0.0);
        let d = hausdorff_cells(&a, &split(0.1), &bounds).unwrap();
        assert!((d - 0.1).abs() < 1e-12);
        let three = build_affine_cells(
            &voronoi_functions(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap(),
        );
        assert_eq!(
            hausdorff_cells(&a, &three, &bounds),
            Err(GeomError::CellCountMismatch(2, 3))
        );
    }

    #[test]
    fn restrict_examples() {
        let body = Body::new(HPolyhedron::from_box(&[0.0, 0.0], &[1.0, 1.0])).unwrap();
        let whole = build_affine_cells(&AffineSpec::new(vec![lin(&[0.0, 0.0], 0.0)]).unwrap());
        let r = restrict(&whole, &body);
        assert!((r.cell(0).support(&[1.0, 1.0]).unwrap() - 2.0).abs() < 1e-12);
        let pair =
            build_affine_cells(&voronoi_functions(&[vec![0.0, 0.5], vec![1.0, 0.5]]).unwrap());
        let r = restrict(&pair, &body);
        assert!((r.cell(0).support(&[1.0, 0.0]).unwrap() - 0.5).abs() < 1e-12);
        assert!((r.cell(1).support(&[-1.0, 0.0]).unwrap() + 0.5).abs() < 1e-12);
        let far =
            build_affine_cells(&voronoi_functions(&[vec![0.5, 0.5], vec![9.0, 0.5]]).unwrap());
        let r = restrict(&far, &body);
        assert_eq!(r.len(), 2);
        assert!(r.is_cell_empty(1));
    }
}

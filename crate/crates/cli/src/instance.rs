//! JSON instance files: a body plus a partition given as affine functions, a
//! hierarchical tree or explicit cells.

use std::path::Path;

use kadets_core::partition::{build_affine_cells, hierarchical_cells, restrict};
use kadets_core::polygon::{polygon_from_hrep, Rect};
use kadets_core::verify::{Generator, Instance, InstanceKind};
use kadets_core::{
    AffineFunc, AffineSpec, Ambient, Body, CellSet, HPolyhedron, PartitionTree, PolygonV,
};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Row {
    pub normal: Vec<f64>,
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Func {
    pub gradient: Vec<f64>,
    pub offset: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum BodySpec {
    Halfspaces(Vec<Row>),
    /// Convex polygon, vertices in either orientation.
    Polygon(Vec<[f64; 2]>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeSpec {
    pub function: Func,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<TreeSpec>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmbientTag {
    /// Cells partition the whole space and are intersected with the body.
    Space,
    /// Cells partition the body.
    Body,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum PartitionSpec {
    Affine {
        functions: Vec<Func>,
    },
    Tree(TreeSpec),
    Cells {
        ambient: AmbientTag,
        cells: Vec<Vec<Row>>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub dimension: usize,
    pub body: BodySpec,
    pub partition: PartitionSpec,
    #[serde(default, skip_serializing_if = "Map::is_empty")]
    pub metadata: Map<String, Value>,
}

/// An instance ready for the algorithms.
#[derive(Clone, Debug)]
pub struct Loaded {
    pub body: Body,
    /// The body as a polygon when planar.
    pub polygon: Option<PolygonV>,
    /// Partition of the whole space, when the file provides one.
    pub space: Option<CellSet>,
    /// Cells `C_i = V_i ∩ B`.
    pub cells: CellSet,
}

fn row_of(h: &kadets_core::Halfspace) -> Row {
    Row {
        normal: h.normal().to_vec(),
        bound: h.bound(),
    }
}

fn rows_of(p: &HPolyhedron) -> Vec<Row> {
    p.halfspaces().iter().map(row_of).collect()
}

fn func_of(f: &AffineFunc) -> Func {
    Func {
        gradient: f.gradient.clone(),
        offset: f.offset,
    }
}

fn tree_of(t: &PartitionTree) -> TreeSpec {
    TreeSpec {
        function: func_of(&t.func),
        children: t.children.iter().map(tree_of).collect(),
    }
}

fn to_tree(t: &TreeSpec) -> PartitionTree {
    PartitionTree::node(
        AffineFunc::new(t.function.gradient.clone(), t.function.offset),
        t.children.iter().map(to_tree).collect(),
    )
}

fn finite(xs: &[f64], what: &str) -> Result<(), CliError> {
    if xs.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(CliError::Input(format!("{what}: non-finite number")))
    }
}

fn check_dim(len: usize, d: usize, what: &str) -> Result<(), CliError> {
    if len == d {
        Ok(())
    } else {
        Err(CliError::Input(format!(
            "{what}: expected {d} coordinates, got {len}"
        )))
    }
}

fn check_rows(rows: &[Row], d: usize, what: &str) -> Result<(), CliError> {
    for (j, r) in rows.iter().enumerate() {
        check_dim(r.normal.len(), d, &format!("{what} row {j}"))?;
        finite(&r.normal, what)?;
        finite(&[r.bound], what)?;
    }
    Ok(())
}

fn check_tree(t: &TreeSpec, d: usize) -> Result<(), CliError> {
    check_dim(t.function.gradient.len(), d, "tree function")?;
    finite(&t.function.gradient, "tree function")?;
    finite(&[t.function.offset], "tree function")?;
    t.children.iter().try_for_each(|c| check_tree(c, d))
}

fn polyhedron(rows: &[Row], d: usize) -> Result<HPolyhedron, CliError> {
    Ok(HPolyhedron::from_rows(
        d,
        rows.iter().map(|r| (r.normal.clone(), r.bound)).collect(),
    )?)
}

fn convex_polygon(pts: &[[f64; 2]]) -> Result<PolygonV, CliError> {
    PolygonV::new(pts.to_vec())
        .or_else(|_| PolygonV::new(pts.iter().rev().copied().collect()))
        .map_err(|e| CliError::Input(format!("body polygon: {e}")))
}

/// Polygon of a bounded planar polyhedron.
pub fn planar_polygon(p: &HPolyhedron) -> Result<PolygonV, CliError> {
    let (lo, hi) = p.bounding_box()?;
    let frame = Rect::new([lo[0], lo[1]], [hi[0], hi[1]]).inflated(1.0);
    Ok(polygon_from_hrep(p, &frame)?)
}

impl InstanceFile {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let f: InstanceFile =
            serde_json::from_str(text).map_err(|e| CliError::Input(format!("schema: {e}")))?;
        f.validate()?;
        Ok(f)
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::io(path.display().to_string(), e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }

    /// Structural checks beyond the JSON schema: dimensions and finiteness.
    pub fn validate(&self) -> Result<(), CliError> {
        let d = self.dimension;
        if d == 0 {
            return Err(CliError::Input("dimension must be positive".into()));
        }
        match &self.body {
            BodySpec::Halfspaces(rows) => check_rows(rows, d, "body")?,
            BodySpec::Polygon(pts) => {
                if d != 2 {
                    return Err(CliError::Input("polygon bodies need dimension 2".into()));
                }
                finite(
                    &pts.iter().flatten().copied().collect::<Vec<_>>(),
                    "body polygon",
                )?;
            }
        }
        match &self.partition {
            PartitionSpec::Affine { functions } => {
                if functions.is_empty() {
                    return Err(CliError::Input("affine partition needs a function".into()));
                }
                for f in functions {
                    check_dim(f.gradient.len(), d, "affine function")?;
                    finite(&f.gradient, "affine function")?;
                    finite(&[f.offset], "affine function")?;
                }
            }
            PartitionSpec::Tree(t) => check_tree(t, d)?,
            PartitionSpec::Cells { cells, .. } => {
                if cells.is_empty() {
                    return Err(CliError::Input("cell list is empty".into()));
                }
                for (i, c) in cells.iter().enumerate() {
                    check_rows(c, d, &format!("cell {i}"))?;
                }
            }
        }
        Ok(())
    }

    pub fn load(&self) -> Result<Loaded, CliError> {
        let d = self.dimension;
        let (body, polygon) = match &self.body {
            BodySpec::Halfspaces(rows) => {
                let body = Body::new(polyhedron(rows, d)?)?;
                let polygon = if d == 2 {
                    Some(planar_polygon(body.polyhedron())?)
                } else {
                    None
                };
                (body, polygon)
            }
            BodySpec::Polygon(pts) => {
                let poly = convex_polygon(pts)?;
                (Body::new(poly.to_hpolyhedron())?, Some(poly))
            }
        };
        let (space, cells) = match &self.partition {
            PartitionSpec::Affine { functions } => {
                let spec = AffineSpec::new(
                    functions
                        .iter()
                        .map(|f| AffineFunc::new(f.gradient.clone(), f.offset))
                        .collect(),
                )?;
                let space = build_affine_cells(&spec);
                let cells = restrict(&space, &body);
                (Some(space), cells)
            }
            PartitionSpec::Tree(t) => {
                let tree = to_tree(t);
                let space = hierarchical_cells(&tree)?;
                let cells = restrict(&space, &body);
                (Some(space), cells)
            }
            PartitionSpec::Cells { ambient, cells } => {
                let polys = cells
                    .iter()
                    .map(|c| polyhedron(c, d))
                    .collect::<Result<Vec<_>, _>>()?;
                let raw = CellSet::new(d, polys, Ambient::Space);
                let restricted = restrict(&raw, &body);
                match ambient {
                    AmbientTag::Space => (Some(raw), restricted),
                    AmbientTag::Body => (None, restricted),
                }
            }
        };
        Ok(Loaded {
            body,
            polygon,
            space,
            cells,
        })
    }

    /// File for a generated instance; planar extended instances and fixtures
    /// store the cells of the body so they can be extended again.
    pub fn from_instance(inst: &Instance) -> Self {
        let d = inst.meta.d;
        let body = match &inst.polygon {
            Some(p) => BodySpec::Polygon(p.vertices().to_vec()),
            None => BodySpec::Halfspaces(rows_of(inst.body.polyhedron())),
        };
        let partition = match (&inst.generator, inst.meta.kind) {
            (_, InstanceKind::Extended2d | InstanceKind::Fixture) | (Generator::Cells, _) => {
                PartitionSpec::Cells {
                    ambient: AmbientTag::Body,
                    cells: inst.cells.cells().iter().map(rows_of).collect(),
                }
            }
            (Generator::Affine(spec), _) => PartitionSpec::Affine {
                functions: spec.funcs().iter().map(func_of).collect(),
            },
            (Generator::Tree(t), _) => PartitionSpec::Tree(tree_of(t)),
        };
        let mut metadata = Map::new();
        metadata.insert("kind".into(), Value::String(inst.meta.kind.name().into()));
        metadata.insert("seed".into(), Value::from(inst.meta.seed));
        metadata.insert("k".into(), Value::from(inst.meta.k));
        Self {
            dimension: d,
            body,
            partition,
            metadata,
        }
    }

    /// File holding explicit cells.
    pub fn from_cells(polygon: &PolygonV, cells: &CellSet, ambient: AmbientTag) -> Self {
        Self {
            dimension: cells.dim(),
            body: BodySpec::Polygon(polygon.vertices().to_vec()),
            partition: PartitionSpec::Cells {
                ambient,
                cells: cells.cells().iter().map(rows_of).collect(),
            },
            metadata: Map::new(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use kadets_core::verify::gen_instance;

    #[test]
    fn generated_instances_round_trip() {
        for (kind, d) in [
            (InstanceKind::Affine, 3),
            (InstanceKind::Voronoi, 2),
            (InstanceKind::Hierarchical, 3),
            (InstanceKind::Extended2d, 2),
            (InstanceKind::Fixture, 2),
        ] {
            let inst = gen_instance(kind, 5, 4, d).unwrap();
            let f = InstanceFile::from_instance(&inst);
            let back = InstanceFile::from_json(&f.to_json()).unwrap();
            assert_eq!(f, back);
            let loaded = back.load().unwrap();
            assert_eq!(loaded.cells.len(), inst.cells.len());
        }
    }

    #[test]
    fn unknown_fields_and_bad_dimensions_are_rejected() {
        let bad = r#"{"dimension": 2, "body": {"polygon": [[0,0],[1,0],[0,1]]},
                      "partition": {"kind": "affine", "payload": {"functions": []}}, "extra": 1}"#;
        assert!(matches!(
            InstanceFile::from_json(bad),
            Err(CliError::Input(_))
        ));
        let bad = r#"{"dimension": 2, "body": {"polygon": [[0,0],[1,0],[0,1]]},
                      "partition": {"kind": "affine", "payload": {"functions": [{"gradient": [1], "offset": 0}]}}}"#;
        assert!(matches!(
            InstanceFile::from_json(bad),
            Err(CliError::Input(_))
        ));
    }

    #[test]
    fn clockwise_polygons_are_accepted() {
        let f = r#"{"dimension": 2, "body": {"polygon": [[0,0],[0,1],[1,1],[1,0]]},
                    "partition": {"kind": "affine", "payload": {"functions": [{"gradient": [0,0], "offset": 0}]}}}"#;
        let l = InstanceFile::from_json(f).unwrap().load().unwrap();
        assert_eq!(l.cells.len(), 1);
    }
}

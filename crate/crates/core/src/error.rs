use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("halfspace normal has zero length")]
    ZeroNormal,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("set is empty")]
    Empty,
    #[error("set is unbounded in the requested direction")]
    Unbounded,
    #[error("body must be bounded with nonempty interior")]
    NotABody,
    #[error("intersection with the bounding box has empty interior")]
    EmptyIntersection,
    #[error("polygon is not strictly convex and counter-clockwise")]
    NotConvex,
    #[error("operation requires dimension {0}")]
    RequiresDimension(usize),
    #[error("index {index} out of range for {len} items")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("cell count mismatch: {0} vs {1}")]
    CellCountMismatch(usize, usize),
    #[error("invalid partition tree: {0}")]
    InvalidTree(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExtendError {
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error("cells do not partition the boundary near arclength {at:.6}: {detail}")]
    InconsistentPartition { at: f64, detail: String },
    #[error("no outward ray direction at boundary vertex {vertex} (internal edge tangent to the boundary)")]
    NoValidDirection { vertex: usize },
    #[error("ray erasing did not terminate within {0} iterations")]
    NonTermination(usize),
    #[error("extension contract violated: {0}")]
    Contract(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerifyError {
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Extend(#[from] ExtendError),
    #[error("cell {0} of a bounded body has unbounded inradius (kernel bug)")]
    UnboundedCell(usize),
    #[error("unsupported instance: {0}")]
    Unsupported(String),
    #[error("instance generation failed after {0} attempts")]
    GenerationFailed(usize),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NonEuclidError {
    #[error("set is empty")]
    Empty,
    #[error("point set is contained in an open hemisphere (margin {0:.3e})")]
    InOpenHemisphere(f64),
    #[error("invalid input: {0}")]
    Invalid(String),
}

//! Convex partitions of convex bodies, relative inradii via linear
//! programming, and numerical checks of Kadets-type inequalities.
//!
//! Module map:
//! - [`geom`], [`lp`], [`polygon`]: halfspace kernel, simplex solver, planar polygons
//! - [`inradius`]: relative inradius `r_B(C)` and offset families
//! - [`partition`]: affine, Voronoi and hierarchical partitions
//! - [`extend2d`]: extension of planar convex partitions to the whole plane
//! - [`verify`]: inequality reports, translation sweeps, random instances
//! - [`noneuclid`]: spherical Monte-Carlo checks and the hyperbolic disk cover

// `!(x > tol)` is used on purpose so that NaN counts as failure.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod extend2d;
pub mod fixtures;
pub mod geom;
pub mod inradius;
pub mod lp;
pub mod minimax;
pub mod noneuclid;
pub mod partition;
pub mod polygon;
pub mod serde_ext;
pub mod verify;

pub use error::{ExtendError, GeomError, NonEuclidError, VerifyError};
pub use extend2d::{extend_partition, BoundaryGraph, RaySystem};
pub use geom::{AffineFunc, HPolyhedron, Halfspace, EPS_GEO, EPS_LP};
pub use inradius::{relative_inradius, Body, InradiusResult, InradiusStatus, OffsetFamily};
pub use lp::{solve_lp, LpOutcome, LpProblem};
pub use noneuclid::{
    hyperbolic_counterexample_search, hyperbolic_inradius, mc_eps_neighborhood, mc_isoperimetry,
    mc_star_correlation, spherical_inradius, HyperbolicRegion, McEstimate, SphericalConvexSet,
    SphericalPointSet,
};
pub use partition::{AffineSpec, Ambient, CellSet, PartitionTree};
pub use polygon::{Point2, PolygonV, Rect};
pub use verify::{kadets_sum, InstanceKind, KadetsReport};

//! Spherical and hyperbolic companions of the Euclidean checks: spherical
//! inradius, Monte-Carlo estimates for the correlation, neighbourhood and
//! isoperimetric inequalities on `S^n`, and a two-set cover of a hyperbolic
//! disk whose inradii sum to less than its radius.

pub mod hyperbolic;
pub mod mc;
pub mod sphere;

pub use hyperbolic::{
    hexagon_cover, hyperbolic_counterexample_search, hyperbolic_inradius, CounterexampleReport,
    CoverConfig, HypInradius, HyperbolicRegion,
};
pub use mc::{
    mc_eps_neighborhood, mc_isoperimetry, mc_star_correlation, McEstimate, StarBody, MC_SE_BAND,
};
pub use sphere::{spherical_inradius, SphericalConvexSet, SphericalPointSet};

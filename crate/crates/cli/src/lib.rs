//! Command-line surface for the kadets checks: JSON instances and reports,
//! experiment drivers and SVG figures.
//!
//! Exit codes: 0 pass, 1 inequality violation, 2 input error, 3 internal
//! contract violation.

pub mod commands;
pub mod error;
pub mod instance;
pub mod svg;

pub use error::CliError;
pub use instance::InstanceFile;

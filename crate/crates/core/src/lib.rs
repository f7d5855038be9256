//! Numerical laboratory for backward uniqueness of the heat equation in cones.
//!
//! The crate evaluates the Carleman weight families, the convexity
//! certificate that fixes the critical opening angle, the conjugated-operator
//! energy identity, the explicit sector counterexample, and finite-difference
//! heat solvers used for the decay and control experiments.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod counterexample;
pub mod error;
pub mod geometry;
pub mod heatfd;
pub mod linalg;
pub mod positivity;
pub mod verify;
pub mod weights;

pub use error::{Error, Result};
pub use geometry::{ConeSpec, SpaceTimePoint};
pub use weights::WeightParams;

/// Crate version, echoed in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

//! Numerical laboratory for the renormalization scheme at a heterodimensional
//! tangency between two saddle-foci.
//!
//! The crate builds the model diffeomorphism as a chart-transition system,
//! searches sojourn times, evaluates renormalized return maps both by direct
//! composition and by closed-form algebra, and measures their convergence to
//! the center-unstable Hénon-like limit endomorphism.

// Guards are written as `!(x > 0.0)` so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod scalar;
pub mod error;
pub mod vec3;
pub mod henon_limit;
pub mod cycle_model;
pub mod sojourn_search;
pub mod renorm_engine;
pub mod blender_cert;

pub use error::{Error, Result};
pub use scalar::{DoubleDouble, Precision, Real};
pub use vec3::Vec3;

//! Phase retrieval for synthetic apertures sampled by an intensity-only probe.
//!
//! The crate recovers the complex field across a planar aperture from
//! measurements of `|b|²` alone. The pipeline has three stages:
//!
//! 1. a lifted linear program over the relaxed source covariance `S`
//!    ([`stage1_lift`]), whose dominant eigenvector seeds the phase;
//! 2. a sparse projection of the current field estimate onto the array
//!    manifold ([`alternating_projections::stage2_project`]);
//! 3. conjugate-gradient ascent of the array output power over unit-modulus
//!    phase weights ([`alternating_projections::stage3_cg`]).
//!
//! Stages 2 and 3 alternate until the minimax residual bound settles.
//! [`scene_sim`] produces synthetic measurements and [`beamformer_eval`]
//! scores a recovered field against ground truth.

pub mod alternating_projections;
pub mod array_model;
pub mod beamformer_eval;
mod error;
pub mod lp_solver;
pub mod phase;
pub mod scene_sim;
pub mod stage1_lift;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = nalgebra::Complex<f64>;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

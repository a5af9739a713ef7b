//! Radial analysis of drift-diffusion equations `Δu + ⟨b, ∇u⟩ - c u = 0` on
//! rotationally symmetric model manifolds.

pub mod cli;
pub mod config;
pub mod error;
pub mod experiments;
pub mod fields;
pub mod geometry;
pub mod interp;
pub mod plot;
pub mod presets;
pub mod quadrature;
pub mod report;
pub mod solver;
pub mod weights;

pub use error::{Error, Result};

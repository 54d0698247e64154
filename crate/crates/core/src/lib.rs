//! Discrete models of connected sums of ℝⁿ × (torus) ends, resolvent
//! parametrices, spectral multipliers and Riesz transform L^p diagnostics.

pub mod error;
pub mod exec;
pub mod geometry;
pub mod harness;
pub mod linalg;
pub mod parametrix;
pub mod riesz;
pub mod special_fn;
pub mod spectral;

pub use error::{LabError, Result};
pub use exec::Exec;

//! Periodic-box spectral representation, transforms, operators and norms.

pub mod checkpoint;
pub mod fft;
mod field;
mod geometry;
pub mod ops;
mod state;

use thiserror::Error;

pub use field::{Parity, ScalarField};
pub use geometry::{Domain, Geometry, Grid};
pub use ops::{dealias, derivative, divergence_h, laplacian3, vertical_integral, Direction};
pub(crate) use state::leray_z_mean;
pub use state::{ConstraintViolation, Space, StateVector};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("sample array has {got} entries, grid expects {expected}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("vertical integral needs zero z-mean, found |c| = {magnitude:e} at (k1, k2) = ({k1}, {k2})")]
    NonzeroZMean { k1: i64, k2: i64, magnitude: f64 },
}

/// Forward transform of physical samples.
pub fn transform_forward(geom: Geometry, samples: &[f64]) -> Result<ScalarField, SpectralError> {
    ScalarField::from_physical(geom, samples)
}

/// Inverse transform to physical samples.
pub fn transform_inverse(field: &ScalarField) -> Vec<f64> {
    field.to_physical()
}

/// See [`StateVector::project_symmetries`].
pub fn project_state_symmetries(state: &StateVector) -> StateVector {
    state.project_symmetries()
}

#[cfg(test)]
mod tests;

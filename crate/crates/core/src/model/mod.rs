//! The 3D viscous primitive equations: hydrostatic advection, Coriolis,
//! buoyancy-induced pressure gradient, surface pressure, viscosity and
//! forcing.

mod forcing;
mod params;
mod rhs;

use thiserror::Error;

pub use forcing::{Component, ForcingEntry, ForcingPreset, ForcingSpec, FORCING_BAND};
pub use params::{PhysicalParams, Terms};
pub use rhs::{
    linear_terms, nonlinear_term, nonlinear_term_with_speeds, pressure_projection, rhs, speeds, vertical_velocity,
    Speeds, Tendency,
};
pub(crate) use rhs::rhs_with_speeds;

use crate::spectral::SpectralError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("invalid forcing: {0}")]
    InvalidForcing(String),
    #[error("invalid physical parameters: {0}")]
    InvalidParams(String),
    #[error("state and forcing live on different geometries")]
    GeometryMismatch,
}

#[cfg(test)]
mod tests;

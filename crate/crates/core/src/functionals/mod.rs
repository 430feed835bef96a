//! Eigenmodes of `A`, observation functionals, interpolation operators,
//! completeness defects and operator norms.

pub mod container;
mod estimate;
mod interpolation;
mod modes;
mod multiplier;
mod sparse;

use thiserror::Error;

pub use estimate::{estimate_completeness_defect, operator_norm, reconstruction_norm, Estimate, PowerIterationConfig};
pub use interpolation::{apply_interpolation, build_generalized_operator, InterpolationOperator, LAGRANGE_TOLERANCE};
pub use modes::{complement, project_modes, ComponentIndex, Mode, ModeSet, SHELL_TOLERANCE};
pub use multiplier::{MultiplierK, MultiplierPreset};
pub use sparse::{Entry, SparseState};

use crate::spectral::Space;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FunctionalsError {
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("invalid multiplier: {0}")]
    InvalidMultiplier(String),
    #[error("Gram matrix of the functionals is singular")]
    SingularGram,
    #[error("power iteration stopped at {iterations} iterations with value {value} and residual {residual:e}")]
    NonConvergence { value: f64, residual: f64, iterations: usize },
}

/// Closed form for a modal set, otherwise the power-iteration estimate.
pub enum DefectSource<'a> {
    Modes(&'a ModeSet),
    Operator(&'a InterpolationOperator),
}

/// `epsilon_L(V, H)`: `lambda_{N+1}^{-s/2}` for modal sets, the truncated
/// estimate for general operators.
pub fn completeness_defect(
    source: DefectSource<'_>,
    space: Space,
    config: &PowerIterationConfig,
) -> Result<Estimate, FunctionalsError> {
    match source {
        DefectSource::Modes(set) => Ok(Estimate {
            value: set.closed_form_defect(space),
            residual: 0.0,
            iterations: 0,
        }),
        DefectSource::Operator(op) => estimate_completeness_defect(op, space, config),
    }
}

#[cfg(test)]
mod tests;

use super::{ForcingSpec, ModelError};

/// Switches for individual right-hand-side contributions. All on by default.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Terms {
    pub nonlinear: bool,
    pub coriolis: bool,
    pub buoyancy: bool,
}

impl Default for Terms {
    fn default() -> Self {
        Self {
            nonlinear: true,
            coriolis: true,
            buoyancy: true,
        }
    }
}

impl Terms {
    /// Only viscosity and forcing remain.
    pub fn linear_diffusion() -> Self {
        Self {
            nonlinear: false,
            coriolis: false,
            buoyancy: false,
        }
    }
}

/// Viscosity, Coriolis parameter and forcing.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalParams {
    pub nu: f64,
    pub f_coriolis: f64,
    pub forcing: ForcingSpec,
    pub terms: Terms,
}

impl PhysicalParams {
    pub fn new(nu: f64, f_coriolis: f64, forcing: ForcingSpec) -> Result<Self, ModelError> {
        if !(nu.is_finite() && nu > 0.0) {
            return Err(ModelError::InvalidParams(format!("nu must be positive, got {nu}")));
        }
        if !f_coriolis.is_finite() {
            return Err(ModelError::InvalidParams("Coriolis parameter must be finite".into()));
        }
        Ok(Self {
            nu,
            f_coriolis,
            forcing,
            terms: Terms::default(),
        })
    }

    pub fn with_terms(mut self, terms: Terms) -> Self {
        self.terms = terms;
        self
    }
}

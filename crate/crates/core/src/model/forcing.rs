//! Volume sources `G = (G_f, G_b)`.

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ModelError;
use crate::spectral::{Geometry, Parity, ScalarField, Space, StateVector};

/// Largest `|k_i|` a forcing coefficient may carry.
pub const FORCING_BAND: i64 = 4;

/// Which component a forcing coefficient belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Component {
    V1,
    V2,
    B,
}

/// One explicit forcing coefficient `c_{(k1,k2,m)}` of a component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcingEntry {
    pub component: Component,
    pub k1: i64,
    pub k2: i64,
    pub m: i64,
    pub re: f64,
    pub im: f64,
}

/// Named forcing shapes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ForcingPreset {
    /// `G = 0`.
    None,
    /// `G_f = (cos(2 pi z/L3) sin(2 pi x2/L2), 0)`, `G_b = sin(2 pi z/L3) cos(2 pi x1/L1)`.
    Default,
}

/// A band-limited forcing `amplitude * shape` compatible with the state
/// constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct ForcingSpec {
    shape: StateVector,
    amplitude: f64,
    field: StateVector,
}

impl ForcingSpec {
    pub fn zero(geom: Geometry) -> Self {
        Self::from_shape(StateVector::zeros(geom), 0.0).expect("zero forcing is valid")
    }

    pub fn preset(geom: Geometry, preset: ForcingPreset, amplitude: f64) -> Result<Self, ModelError> {
        match preset {
            ForcingPreset::None => Ok(Self::zero(geom)),
            ForcingPreset::Default => {
                // exact coefficients of cos(z) sin(x2) and sin(z) cos(x1)
                let quarter_i = Complex64::new(0.0, 0.25);
                let mut v1 = ScalarField::zeros(geom, Parity::Even);
                let mut b = ScalarField::zeros(geom, Parity::Odd);
                for m in [-1i64, 1] {
                    v1.set_coeff(0, 1, m, -quarter_i);
                    v1.set_coeff(0, -1, m, quarter_i);
                    for k1 in [-1i64, 1] {
                        b.set_coeff(k1, 0, m, -quarter_i * m as f64);
                    }
                }
                let shape =
                    StateVector::from_fields(v1, ScalarField::zeros(geom, Parity::Even), b).project_symmetries();
                Self::from_shape(shape, amplitude)
            }
        }
    }

    /// Builds a forcing from explicit coefficients. The shape is projected
    /// onto the constrained space, so mirrored coefficients may be omitted.
    pub fn from_entries(geom: Geometry, entries: &[ForcingEntry], amplitude: f64) -> Result<Self, ModelError> {
        let mut shape = StateVector::zeros(geom);
        for e in entries {
            if e.k1.abs() > FORCING_BAND || e.k2.abs() > FORCING_BAND || e.m.abs() > FORCING_BAND {
                return Err(ModelError::InvalidForcing(format!(
                    "entry ({}, {}, {}) is outside the forcing band |k_i| <= {FORCING_BAND}",
                    e.k1, e.k2, e.m
                )));
            }
            if !(e.re.is_finite() && e.im.is_finite()) {
                return Err(ModelError::InvalidForcing("non-finite coefficient".into()));
            }
            let g = geom.grid;
            if g.slot(0, e.k1).is_none() || g.slot(1, e.k2).is_none() || g.slot(2, e.m).is_none() {
                return Err(ModelError::InvalidForcing(format!(
                    "entry ({}, {}, {}) is not representable on the grid",
                    e.k1, e.k2, e.m
                )));
            }
            let f = match e.component {
                Component::V1 => &mut shape.v1,
                Component::V2 => &mut shape.v2,
                Component::B => &mut shape.b,
            };
            let c = f.coeff(e.k1, e.k2, e.m) + Complex64::new(e.re, e.im);
            f.set_coeff(e.k1, e.k2, e.m, c);
        }
        // a coefficient listed without its mirror images is averaged with them
        Self::from_shape(shape.project_symmetries(), amplitude)
    }

    /// Validates a constrained shape and scales it.
    pub fn from_shape(shape: StateVector, amplitude: f64) -> Result<Self, ModelError> {
        if !amplitude.is_finite() {
            return Err(ModelError::InvalidForcing("amplitude must be finite".into()));
        }
        let geom = *shape.geometry();
        let g = geom.grid;
        for f in shape.fields() {
            for (idx, c) in f.coeffs().iter().enumerate() {
                if *c == Complex64::default() {
                    continue;
                }
                let [i1, i2, i3] = g.unravel(idx);
                if g.freq(0, i1).abs() > FORCING_BAND
                    || g.freq(1, i2).abs() > FORCING_BAND
                    || g.freq(2, i3).abs() > FORCING_BAND
                {
                    return Err(ModelError::InvalidForcing(
                        "forcing must be band-limited to |k_i| <= 4".into(),
                    ));
                }
            }
        }
        let violation = shape.constraint_violation();
        if violation.max() > 1e-10 {
            return Err(ModelError::InvalidForcing(format!(
                "forcing violates the state constraints: {violation:?}"
            )));
        }
        let mut field = shape.scaled(amplitude);
        field.dealias();
        Ok(Self {
            shape,
            amplitude,
            field,
        })
    }

    pub fn shape(&self) -> &StateVector {
        &self.shape
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    /// `G`, already scaled and truncated to the dealiased band.
    pub fn field(&self) -> &StateVector {
        &self.field
    }

    /// `K_G = (||G_f||^2 + ||G_b||^2)^{1/2}`.
    pub fn magnitude(&self) -> f64 {
        self.field.norm(Space::H)
    }

    pub fn with_amplitude(&self, amplitude: f64) -> Result<Self, ModelError> {
        Self::from_shape(self.shape.clone(), amplitude)
    }

    pub fn is_zero(&self) -> bool {
        self.amplitude == 0.0 || self.field.max_abs_coeff() == 0.0
    }
}

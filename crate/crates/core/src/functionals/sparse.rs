use rustfft::num_complex::Complex64;

use crate::spectral::{Geometry, StateVector};

/// One nonzero coefficient of a state: component (0 = v1, 1 = v2, 2 = b),
/// flat grid index and value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entry {
    pub component: usize,
    pub index: usize,
    pub value: Complex64,
}

/// A state stored by its nonzero coefficients.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseState {
    pub entries: Vec<Entry>,
}

impl SparseState {
    pub fn new(entries: Vec<Entry>) -> Self {
        Self { entries }
    }

    /// Nonzero coefficients of a dense state.
    pub fn from_state(state: &StateVector) -> Self {
        let mut entries = Vec::new();
        for (component, f) in state.fields().iter().enumerate() {
            for (index, &value) in f.coeffs().iter().enumerate() {
                if value != Complex64::new(0.0, 0.0) {
                    entries.push(Entry { component, index, value });
                }
            }
        }
        Self { entries }
    }

    pub fn to_state(&self, geom: Geometry) -> StateVector {
        let mut out = StateVector::zeros(geom);
        self.add_scaled_to(&mut out, 1.0);
        out
    }

    /// `(self, u)_H`.
    pub fn inner(&self, u: &StateVector, volume: f64) -> f64 {
        let fields = u.fields();
        let mut acc = 0.0;
        for e in &self.entries {
            let c = fields[e.component].coeffs()[e.index];
            acc += e.value.re * c.re + e.value.im * c.im;
        }
        acc * volume
    }

    /// `(self, other)_H`; both are assumed to list each coefficient once.
    pub fn inner_sparse(&self, other: &SparseState, volume: f64) -> f64 {
        let mut acc = 0.0;
        for a in &self.entries {
            for b in &other.entries {
                if a.component == b.component && a.index == b.index {
                    acc += a.value.re * b.value.re + a.value.im * b.value.im;
                }
            }
        }
        acc * volume
    }

    /// `u += a * self`.
    pub fn add_scaled_to(&self, u: &mut StateVector, a: f64) {
        let fields = u.fields_mut();
        for e in &self.entries {
            fields[e.component].coeffs_mut()[e.index] += e.value * a;
        }
    }

    /// Multiplies every coefficient by `symbol[index]`.
    pub fn apply_symbol(&self, symbol: &[f64]) -> SparseState {
        SparseState {
            entries: self
                .entries
                .iter()
                .map(|e| Entry {
                    value: e.value * symbol[e.index],
                    ..*e
                })
                .collect(),
        }
    }

    pub fn scaled(&self, a: f64) -> SparseState {
        SparseState {
            entries: self.entries.iter().map(|e| Entry { value: e.value * a, ..*e }).collect(),
        }
    }

    pub fn norm(&self, volume: f64) -> f64 {
        (self.entries.iter().map(|e| e.value.norm_sqr()).sum::<f64>() * volume).sqrt()
    }
}

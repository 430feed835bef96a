use std::collections::{BTreeMap, HashMap};

use nalgebra::{DMatrix, DVector};
use rustfft::num_complex::Complex64;

use super::modes::ModeSet;
use super::multiplier::MultiplierK;
use super::sparse::{Entry, SparseState};
use super::FunctionalsError;
use crate::spectral::{Geometry, StateVector};

/// Tolerance on `l_k(psi_j) = delta_kj` for the Lagrange flag.
pub const LAGRANGE_TOLERANCE: f64 = 1e-10;

/// `R u = sum_j l_j(u) psi_j` with `l_j(u) = (g_j, u)_H`.
#[derive(Debug, Clone, PartialEq)]
pub struct InterpolationOperator {
    geom: Geometry,
    riesz: Vec<SparseState>,
    psi: Vec<SparseState>,
    lagrange: bool,
}

impl InterpolationOperator {
    /// Takes Riesz elements and reconstruction elements as given and sets
    /// the Lagrange flag by checking `l_k(psi_j) = delta_kj`.
    pub fn new(geom: Geometry, riesz: Vec<SparseState>, psi: Vec<SparseState>) -> Result<Self, FunctionalsError> {
        if riesz.len() != psi.len() {
            return Err(FunctionalsError::InvalidRequest(format!(
                "{} functionals but {} reconstruction elements",
                riesz.len(),
                psi.len()
            )));
        }
        let mut op = Self {
            geom,
            riesz,
            psi,
            lagrange: false,
        };
        op.lagrange = op.lagrange_defect() <= LAGRANGE_TOLERANCE;
        Ok(op)
    }

    /// No observations at all: `R = 0`.
    pub fn none(geom: Geometry) -> Self {
        Self {
            geom,
            riesz: Vec::new(),
            psi: Vec::new(),
            lagrange: true,
        }
    }

    /// The orthoprojector `P_N` onto the span of the modes.
    pub fn modal(set: &ModeSet) -> Self {
        let shapes: Vec<SparseState> = set.modes().iter().map(|m| m.shape.clone()).collect();
        Self {
            geom: *set.geometry(),
            riesz: shapes.clone(),
            psi: shapes,
            lagrange: true,
        }
    }

    /// Generalized modes `l_j(u) = (K e_j, u)` with `psi_j = K^{-1} e_j`.
    pub fn generalized(set: &ModeSet, k: &MultiplierK) -> Result<Self, FunctionalsError> {
        let inverse = k.inverse_symbol();
        let riesz = set.modes().iter().map(|m| m.shape.apply_symbol(k.symbol())).collect();
        let psi = set.modes().iter().map(|m| m.shape.apply_symbol(&inverse)).collect();
        Self::new(*set.geometry(), riesz, psi)
    }

    /// Lagrange operator for arbitrary functionals: `psi` is the dual basis
    /// obtained from the Gram matrix of the Riesz elements.
    pub fn from_functionals(geom: Geometry, riesz: Vec<SparseState>) -> Result<Self, FunctionalsError> {
        let vol = geom.domain.volume();
        let n = riesz.len();
        let mut gram = DMatrix::zeros(n, n);
        for ((i, j), v) in cross_gram(&riesz, &riesz, vol) {
            gram[(i, j)] = v;
        }
        let inv = gram.cholesky().ok_or(FunctionalsError::SingularGram)?.inverse();
        let mut psi = Vec::with_capacity(n);
        for j in 0..n {
            let mut acc: BTreeMap<(usize, usize), Complex64> = BTreeMap::new();
            for (i, g) in riesz.iter().enumerate() {
                let w = inv[(i, j)];
                if w == 0.0 {
                    continue;
                }
                for e in &g.entries {
                    *acc.entry((e.component, e.index)).or_default() += e.value * w;
                }
            }
            psi.push(SparseState::new(
                acc.into_iter()
                    .map(|((component, index), value)| Entry { component, index, value })
                    .collect(),
            ));
        }
        Self::new(geom, riesz, psi)
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geom
    }

    pub fn rank(&self) -> usize {
        self.riesz.len()
    }

    pub fn is_lagrange(&self) -> bool {
        self.lagrange
    }

    pub fn riesz_elements(&self) -> &[SparseState] {
        &self.riesz
    }

    pub fn reconstruction_elements(&self) -> &[SparseState] {
        &self.psi
    }

    /// `max_{k,j} |l_k(psi_j) - delta_kj|`.
    pub fn lagrange_defect(&self) -> f64 {
        let vol = self.geom.domain.volume();
        let cross = cross_gram(&self.riesz, &self.psi, vol);
        let mut diagonal = vec![0.0; self.riesz.len()];
        let mut worst: f64 = 0.0;
        for ((k, j), v) in cross {
            if k == j {
                diagonal[k] = v;
            } else {
                worst = worst.max(v.abs());
            }
        }
        diagonal.iter().fold(worst, |w, d| w.max((d - 1.0).abs()))
    }

    /// The observation values `l_j(u)`.
    pub fn observe(&self, u: &StateVector) -> Vec<f64> {
        let vol = self.geom.domain.volume();
        self.riesz.iter().map(|g| g.inner(u, vol)).collect()
    }

    /// `sum_j values_j psi_j`.
    pub fn reconstruct(&self, values: &[f64]) -> StateVector {
        let mut out = StateVector::zeros(self.geom);
        for (p, &c) in self.psi.iter().zip(values) {
            p.add_scaled_to(&mut out, c);
        }
        out
    }

    /// `R u`.
    pub fn apply(&self, u: &StateVector) -> StateVector {
        self.reconstruct(&self.observe(u))
    }

    /// `R* u = sum_j (psi_j, u) g_j`, the H-adjoint.
    pub fn apply_adjoint(&self, u: &StateVector) -> StateVector {
        let vol = self.geom.domain.volume();
        let mut out = StateVector::zeros(self.geom);
        for (p, g) in self.psi.iter().zip(&self.riesz) {
            g.add_scaled_to(&mut out, p.inner(u, vol));
        }
        out
    }

    /// `(I - R) u`.
    pub fn residual(&self, u: &StateVector) -> StateVector {
        u.sub(&self.apply(u))
    }
}

/// `(a_i, b_j)_H` for every pair with overlapping support.
pub(crate) fn cross_gram(a: &[SparseState], b: &[SparseState], volume: f64) -> HashMap<(usize, usize), f64> {
    let mut by_slot: HashMap<(usize, usize), Vec<(usize, Complex64)>> = HashMap::new();
    for (j, s) in b.iter().enumerate() {
        for e in &s.entries {
            by_slot.entry((e.component, e.index)).or_default().push((j, e.value));
        }
    }
    let mut out: HashMap<(usize, usize), f64> = HashMap::new();
    for (i, s) in a.iter().enumerate() {
        for e in &s.entries {
            if let Some(list) = by_slot.get(&(e.component, e.index)) {
                for &(j, v) in list {
                    *out.entry((i, j)).or_default() += (e.value.re * v.re + e.value.im * v.im) * volume;
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone)]
enum GramInverse {
    Diagonal(Vec<f64>),
    Dense(DMatrix<f64>),
}

/// Orthogonal projection onto the span of finitely many sparse states.
#[derive(Debug, Clone)]
pub(crate) struct GramProjector {
    geom: Geometry,
    elements: Vec<SparseState>,
    inverse: GramInverse,
}

impl GramProjector {
    pub(crate) fn new(geom: Geometry, elements: Vec<SparseState>) -> Result<Self, FunctionalsError> {
        let vol = geom.domain.volume();
        let n = elements.len();
        let entries = cross_gram(&elements, &elements, vol);
        let inverse = if entries.keys().all(|(i, j)| i == j) {
            let mut d = vec![0.0; n];
            for ((i, _), v) in entries {
                d[i] = v;
            }
            if d.iter().any(|&v| v <= 0.0) {
                return Err(FunctionalsError::SingularGram);
            }
            GramInverse::Diagonal(d.into_iter().map(|v| 1.0 / v).collect())
        } else {
            let mut gram = DMatrix::zeros(n, n);
            for ((i, j), v) in entries {
                gram[(i, j)] = v;
            }
            GramInverse::Dense(gram.cholesky().ok_or(FunctionalsError::SingularGram)?.inverse())
        };
        Ok(Self { geom, elements, inverse })
    }

    /// `u - P u` where `P` projects onto the span.
    pub(crate) fn reject(&self, u: &StateVector) -> StateVector {
        let vol = self.geom.domain.volume();
        let rhs = DVector::from_iterator(self.elements.len(), self.elements.iter().map(|e| e.inner(u, vol)));
        let c = match &self.inverse {
            GramInverse::Diagonal(d) => rhs.component_mul(&DVector::from_column_slice(d)),
            GramInverse::Dense(m) => m * rhs,
        };
        let mut out = u.clone();
        for (e, &ci) in self.elements.iter().zip(c.iter()) {
            e.add_scaled_to(&mut out, -ci);
        }
        out
    }
}

/// `R_L u`.
pub fn apply_interpolation(u: &StateVector, op: &InterpolationOperator) -> StateVector {
    op.apply(u)
}

/// See [`InterpolationOperator::generalized`].
pub fn build_generalized_operator(set: &ModeSet, k: &MultiplierK) -> Result<InterpolationOperator, FunctionalsError> {
    InterpolationOperator::generalized(set, k)
}

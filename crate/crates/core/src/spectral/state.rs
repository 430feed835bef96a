//! The prognostic state `U = (v1, v2, b)` and its norms.

use rand::Rng;
use rustfft::num_complex::Complex64;

use super::ops::dealias_in_place;
use super::{Geometry, Parity, ScalarField};

/// Function space used for norms and inner products.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Space {
    /// `L2` over all three components.
    H,
    /// Weighted by `lambda(k)`, i.e. `||grad U||`.
    W1,
    /// Weighted by `lambda(k)^2`, i.e. `||Delta U||`.
    W2,
}

impl Space {
    /// Exponent `s` such that the space weight is `lambda^s`.
    pub fn order(self) -> i32 {
        match self {
            Space::H => 0,
            Space::W1 => 1,
            Space::W2 => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Space::H => "H",
            Space::W1 => "W1",
            Space::W2 => "W2",
        }
    }
}

/// Horizontal velocity (even in `z`, mean zero) and buoyancy (odd in `z`).
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub v1: ScalarField,
    pub v2: ScalarField,
    pub b: ScalarField,
}

/// Magnitudes of the constraint violations of a state, each relative to
/// its `W1` norm.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ConstraintViolation {
    pub symmetry: f64,
    pub mean: f64,
    pub barotropic: f64,
}

impl ConstraintViolation {
    pub fn max(&self) -> f64 {
        self.symmetry.max(self.mean).max(self.barotropic)
    }
}

impl StateVector {
    pub fn zeros(geom: Geometry) -> Self {
        Self {
            v1: ScalarField::zeros(geom, Parity::Even),
            v2: ScalarField::zeros(geom, Parity::Even),
            b: ScalarField::zeros(geom, Parity::Odd),
        }
    }

    /// Builds a state from raw fields and retags them with the state parities.
    pub fn from_fields(v1: ScalarField, v2: ScalarField, b: ScalarField) -> Self {
        Self {
            v1: v1.with_tags(Parity::Even, true),
            v2: v2.with_tags(Parity::Even, true),
            b: b.with_tags(Parity::Odd, true),
        }
    }

    pub fn geometry(&self) -> &Geometry {
        self.v1.geometry()
    }

    pub fn fields(&self) -> [&ScalarField; 3] {
        [&self.v1, &self.v2, &self.b]
    }

    pub fn fields_mut(&mut self) -> [&mut ScalarField; 3] {
        [&mut self.v1, &mut self.v2, &mut self.b]
    }

    pub fn scale(&mut self, a: f64) {
        for f in self.fields_mut() {
            f.scale(a);
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        let mut out = self.clone();
        out.scale(a);
        out
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: f64, other: &StateVector) {
        self.v1.axpy(a, &other.v1);
        self.v2.axpy(a, &other.v2);
        self.b.axpy(a, &other.b);
    }

    pub fn add(&self, other: &StateVector) -> Self {
        let mut out = self.clone();
        out.axpy(1.0, other);
        out
    }

    pub fn sub(&self, other: &StateVector) -> Self {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    /// Multiplies each component by a real per-index symbol.
    pub fn apply_symbol(&mut self, symbol: &[f64]) {
        for f in self.fields_mut() {
            f.apply_symbol(symbol);
        }
    }

    pub fn dealias(&mut self) {
        for f in self.fields_mut() {
            dealias_in_place(f);
        }
    }

    pub fn inner_product(&self, other: &StateVector, space: Space) -> f64 {
        match space {
            Space::H => self.v1.inner(&other.v1) + self.v2.inner(&other.v2) + self.b.inner(&other.b),
            _ => {
                let geom = self.geometry();
                let lam = geom.lambda_table();
                let w: Vec<f64> = match space {
                    Space::W1 => lam,
                    _ => lam.into_iter().map(|l| l * l).collect(),
                };
                self.v1.inner_weighted(&other.v1, &w)
                    + self.v2.inner_weighted(&other.v2, &w)
                    + self.b.inner_weighted(&other.b, &w)
            }
        }
    }

    /// Parseval-exact norm in the given space.
    pub fn norm(&self, space: Space) -> f64 {
        self.inner_product(self, space).max(0.0).sqrt()
    }

    /// All three norms with one pass over the coefficients.
    pub fn norms(&self) -> [f64; 3] {
        let geom = *self.geometry();
        let g = geom.grid;
        let [n1, n2, n3] = g.dims();
        let mut acc = [0.0f64; 3];
        for i1 in 0..n1 {
            for i2 in 0..n2 {
                for i3 in 0..n3 {
                    let idx = g.index(i1, i2, i3);
                    let e = self.v1.coeffs()[idx].norm_sqr()
                        + self.v2.coeffs()[idx].norm_sqr()
                        + self.b.coeffs()[idx].norm_sqr();
                    if e == 0.0 {
                        continue;
                    }
                    let l = geom.lambda(i1, i2, i3);
                    acc[0] += e;
                    acc[1] += l * e;
                    acc[2] += l * l * e;
                }
            }
        }
        let v = geom.domain.volume();
        acc.map(|a| (a * v).sqrt())
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.fields().iter().map(|f| f.max_abs()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.fields()
            .iter()
            .all(|f| f.coeffs().iter().all(|c| c.re.is_finite() && c.im.is_finite()))
    }

    /// Projection onto the constrained space: reality, `v` even and `b` odd
    /// in `z`, zero mean of `v`, and the 2D divergence-free projection of
    /// the vertical average of `v`.
    pub fn project_symmetries(&self) -> StateVector {
        let mut out = self.clone();
        out.project_symmetries_in_place();
        out
    }

    pub fn project_symmetries_in_place(&mut self) {
        self.v1.set_tags(Parity::Even, true);
        self.v2.set_tags(Parity::Even, true);
        self.b.set_tags(Parity::Odd, true);
        for f in self.fields_mut() {
            f.symmetrize();
        }
        leray_z_mean(&mut self.v1, &mut self.v2);
    }

    /// Measures how far the state is from the constrained space.
    pub fn constraint_violation(&self) -> ConstraintViolation {
        let scale = self.norm(Space::W1).max(f64::MIN_POSITIVE);
        let geom = *self.geometry();
        let g = geom.grid;
        let vol = geom.domain.volume();

        let mut sym = self.clone();
        for f in sym.fields_mut() {
            let (parity, mean_zero) = (f.parity(), f.is_mean_zero());
            f.set_tags(parity, false);
            f.symmetrize();
            f.set_tags(parity, mean_zero);
        }
        let symmetry = self.sub(&sym).norm(Space::W1) / scale;

        let mean = (self.v1.coeffs()[0].norm_sqr() + self.v2.coeffs()[0].norm_sqr()).sqrt()
            * vol.sqrt()
            / scale;

        let [n1, n2, _] = g.dims();
        let mut div2 = 0.0;
        for i1 in 0..n1 {
            for i2 in 0..n2 {
                let idx = g.index(i1, i2, 0);
                let k1 = geom.derivative_wavenumber(0, i1);
                let k2 = geom.derivative_wavenumber(1, i2);
                let d = self.v1.coeffs()[idx] * k1 + self.v2.coeffs()[idx] * k2;
                div2 += d.norm_sqr();
            }
        }
        let barotropic = (div2 * vol).sqrt() / scale;
        ConstraintViolation {
            symmetry,
            mean,
            barotropic,
        }
    }

    /// Seeded random state satisfying every constraint, with coefficients
    /// supported on `lambda <= lambda_max` inside the dealiased band and an
    /// amplitude spectrum `(1 + lambda)^{-decay}`.
    pub fn random<R: Rng + ?Sized>(geom: Geometry, rng: &mut R, lambda_max: f64, decay: f64) -> Self {
        let g = geom.grid;
        let [n1, n2, n3] = g.dims();
        let mut fields = [
            ScalarField::zeros(geom, Parity::Even),
            ScalarField::zeros(geom, Parity::Even),
            ScalarField::zeros(geom, Parity::Odd),
        ];
        for f in fields.iter_mut() {
            let coeffs = f.coeffs_mut();
            for i1 in 0..n1 {
                for i2 in 0..n2 {
                    for i3 in 0..n3 {
                        let lam = geom.lambda(i1, i2, i3);
                        let idx = g.index(i1, i2, i3);
                        if !g.in_band(i1, i2, i3) || lam > lambda_max {
                            continue;
                        }
                        let amp = (1.0 + lam).powf(-decay);
                        coeffs[idx] = Complex64::new(
                            amp * rng.gen_range(-1.0..1.0),
                            amp * rng.gen_range(-1.0..1.0),
                        );
                    }
                }
            }
        }
        let [v1, v2, b] = fields;
        let mut s = StateVector { v1, v2, b };
        s.project_symmetries_in_place();
        s
    }
}

/// Removes the gradient part of the vertical average of `(v1, v2)`.
/// Returns the removed potential's coefficients on the `m = 0` plane.
pub(crate) fn leray_z_mean(v1: &mut ScalarField, v2: &mut ScalarField) -> Vec<(usize, Complex64)> {
    let geom = *v1.geometry();
    let g = geom.grid;
    let [n1, n2, _] = g.dims();
    let mut potential = Vec::new();
    for i1 in 0..n1 {
        for i2 in 0..n2 {
            let idx = g.index(i1, i2, 0);
            let k1 = geom.derivative_wavenumber(0, i1);
            let k2 = geom.derivative_wavenumber(1, i2);
            let kk = k1 * k1 + k2 * k2;
            if kk == 0.0 {
                continue;
            }
            let a = v1.coeffs()[idx];
            let b = v2.coeffs()[idx];
            let kdot = a * k1 + b * k2;
            v1.coeffs_mut()[idx] = a - kdot * (k1 / kk);
            v2.coeffs_mut()[idx] = b - kdot * (k2 / kk);
            // grad phi = i k phi_hat equals k (k.F)/|k|^2  =>  phi_hat = -i (k.F)/|k|^2
            potential.push((idx, Complex64::new(kdot.im, -kdot.re) / kk));
        }
    }
    potential
}

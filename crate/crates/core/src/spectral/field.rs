//! Scalar fields stored as complex Fourier coefficients.

use rustfft::num_complex::Complex64;

use super::{fft, Geometry, SpectralError};

/// Symmetry of a field under `z -> -z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
    None,
}

impl Parity {
    /// Parity after one `z` derivative or one `z` integration.
    pub fn flipped(self) -> Self {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
            Parity::None => Parity::None,
        }
    }

    /// Parity of a pointwise product.
    pub fn product(self, other: Parity) -> Parity {
        match (self, other) {
            (Parity::None, _) | (_, Parity::None) => Parity::None,
            (a, b) if a == b => Parity::Even,
            _ => Parity::Odd,
        }
    }
}

/// Complex spectral coefficients indexed by `(k1, k2, m)` in FFT layout.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    geom: Geometry,
    coeffs: Vec<Complex64>,
    parity: Parity,
    mean_zero: bool,
}

impl ScalarField {
    pub fn zeros(geom: Geometry, parity: Parity) -> Self {
        Self {
            geom,
            coeffs: vec![Complex64::default(); geom.grid.len()],
            parity,
            mean_zero: true,
        }
    }

    pub fn from_coeffs(
        geom: Geometry,
        coeffs: Vec<Complex64>,
        parity: Parity,
        mean_zero: bool,
    ) -> Result<Self, SpectralError> {
        if coeffs.len() != geom.grid.len() {
            return Err(SpectralError::ShapeMismatch {
                expected: geom.grid.len(),
                got: coeffs.len(),
            });
        }
        Ok(Self {
            geom,
            coeffs,
            parity,
            mean_zero,
        })
    }

    /// Forward transform of real physical samples. The result carries no
    /// parity tag and no mean-zero guarantee.
    pub fn from_physical(geom: Geometry, samples: &[f64]) -> Result<Self, SpectralError> {
        if samples.len() != geom.grid.len() {
            return Err(SpectralError::ShapeMismatch {
                expected: geom.grid.len(),
                got: samples.len(),
            });
        }
        Ok(Self {
            geom,
            coeffs: fft::forward_real(&geom.grid, samples),
            parity: Parity::None,
            mean_zero: false,
        })
    }

    /// Samples a closure on the grid and transforms it.
    pub fn from_fn<F: Fn(f64, f64, f64) -> f64>(geom: Geometry, f: F) -> Self {
        let samples = geom.sample(f);
        Self::from_physical(geom, &samples).expect("sampled on own grid")
    }

    pub fn to_physical(&self) -> Vec<f64> {
        fft::inverse_real(&self.geom.grid, &self.coeffs)
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geom
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn is_mean_zero(&self) -> bool {
        self.mean_zero
    }

    pub fn with_tags(mut self, parity: Parity, mean_zero: bool) -> Self {
        self.set_tags(parity, mean_zero);
        self
    }

    pub fn set_tags(&mut self, parity: Parity, mean_zero: bool) {
        self.parity = parity;
        self.mean_zero = mean_zero;
    }

    /// Coefficient at signed wavevector `(k1, k2, m)`; zero when the
    /// wavevector is not representable on the grid.
    pub fn coeff(&self, k1: i64, k2: i64, m: i64) -> Complex64 {
        let g = &self.geom.grid;
        match (g.slot(0, k1), g.slot(1, k2), g.slot(2, m)) {
            (Some(a), Some(b), Some(c)) => self.coeffs[g.index(a, b, c)],
            _ => Complex64::default(),
        }
    }

    pub fn set_coeff(&mut self, k1: i64, k2: i64, m: i64, value: Complex64) {
        let g = self.geom.grid;
        let idx = g.index(
            g.slot(0, k1).expect("k1 out of range"),
            g.slot(1, k2).expect("k2 out of range"),
            g.slot(2, m).expect("m out of range"),
        );
        self.coeffs[idx] = value;
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).fold(0.0, f64::max).sqrt()
    }

    /// `sum |c_k|^2`.
    pub fn coeff_energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Enforces reality, the parity tag and the mean-zero flag by
    /// orthogonal projection. Nyquist planes are dropped since their mirror
    /// is themselves and they carry no well-defined parity or derivative.
    pub fn symmetrize(&mut self) {
        let g = self.geom.grid;
        let [n1, n2, n3] = g.dims();
        let old = self.coeffs.clone();
        let sign = match self.parity {
            Parity::Even => Some(1.0),
            Parity::Odd => Some(-1.0),
            Parity::None => None,
        };
        for i1 in 0..n1 {
            let j1 = g.mirror(0, i1);
            let ny1 = g.is_nyquist(0, i1);
            for i2 in 0..n2 {
                let j2 = g.mirror(1, i2);
                let ny12 = ny1 || g.is_nyquist(1, i2);
                let row = g.index(i1, i2, 0);
                let mrow = g.index(j1, j2, 0);
                for i3 in 0..n3 {
                    let idx = row + i3;
                    if ny12 || g.is_nyquist(2, i3) {
                        self.coeffs[idx] = Complex64::default();
                        continue;
                    }
                    let j3 = g.mirror(2, i3);
                    let c = old[idx];
                    let neg = old[mrow + j3].conj();
                    self.coeffs[idx] = match sign {
                        None => 0.5 * (c + neg),
                        // average over {k, -k, flip_z k, -flip_z k}
                        Some(s) => {
                            let fz = old[row + j3];
                            let fz_neg = old[mrow + i3].conj();
                            0.25 * (c + neg + s * (fz + fz_neg))
                        }
                    };
                }
            }
        }
        if self.mean_zero {
            self.coeffs[0] = Complex64::default();
        }
    }

    /// Largest violation of reality and parity relative to the largest
    /// coefficient, plus the absolute mean when the flag is set.
    pub fn symmetry_defect(&self) -> f64 {
        let g = self.geom.grid;
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        let mut worst: f64 = 0.0;
        for idx in 0..g.len() {
            let c = self.coeffs[idx];
            let neg = self.coeffs[g.mirror_flat(idx)].conj();
            worst = worst.max((c - neg).norm() / scale);
            match self.parity {
                Parity::Even => worst = worst.max((c - self.coeffs[g.flip_z_flat(idx)]).norm() / scale),
                Parity::Odd => worst = worst.max((c + self.coeffs[g.flip_z_flat(idx)]).norm() / scale),
                Parity::None => {}
            }
        }
        if self.mean_zero {
            worst = worst.max(self.coeffs[0].norm() / scale);
        }
        worst
    }

    /// `L2` inner product over the box, `V * Re sum conj(a_k) b_k`.
    pub fn inner(&self, other: &ScalarField) -> f64 {
        let s: f64 = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.re * b.re + a.im * b.im)
            .sum();
        s * self.geom.domain.volume()
    }

    /// Weighted inner product `V * Re sum w_k conj(a_k) b_k`.
    pub fn inner_weighted(&self, other: &ScalarField, weights: &[f64]) -> f64 {
        let s: f64 = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .zip(weights)
            .map(|((a, b), w)| w * (a.re * b.re + a.im * b.im))
            .sum();
        s * self.geom.domain.volume()
    }

    pub fn scale(&mut self, a: f64) {
        for c in self.coeffs.iter_mut() {
            *c *= a;
        }
    }

    /// `self += a * other`; tags of `self` are kept.
    pub fn axpy(&mut self, a: f64, other: &ScalarField) {
        debug_assert_eq!(self.coeffs.len(), other.coeffs.len());
        for (c, o) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *c += a * o;
        }
    }

    /// Multiplies every coefficient by a real per-index factor.
    pub fn apply_symbol(&mut self, symbol: &[f64]) {
        for (c, s) in self.coeffs.iter_mut().zip(symbol) {
            *c *= *s;
        }
    }
}

//! Spectral differential and integral operators.

use rustfft::num_complex::Complex64;

use super::{Parity, ScalarField, SpectralError};

/// Differentiation direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    X1,
    X2,
    Z,
}

impl Direction {
    pub fn axis(self) -> usize {
        match self {
            Direction::X1 => 0,
            Direction::X2 => 1,
            Direction::Z => 2,
        }
    }
}

/// Exact spectral derivative, multiplication by `i 2 pi k / L`.
pub fn derivative(f: &ScalarField, dir: Direction) -> ScalarField {
    let geom = *f.geometry();
    let g = geom.grid;
    let axis = dir.axis();
    let [n1, n2, n3] = g.dims();
    let table: Vec<f64> = (0..g.dims()[axis])
        .map(|i| geom.derivative_wavenumber(axis, i))
        .collect();
    let mut out = f.coeffs().to_vec();
    let times_ik = |c: &mut Complex64, k: f64| *c = Complex64::new(-k * c.im, k * c.re);
    for (row, chunk) in out.chunks_exact_mut(n3).enumerate() {
        match axis {
            0 => {
                let k = table[row / n2];
                chunk.iter_mut().for_each(|c| times_ik(c, k));
            }
            1 => {
                let k = table[row % n2];
                chunk.iter_mut().for_each(|c| times_ik(c, k));
            }
            _ => chunk.iter_mut().zip(&table).for_each(|(c, &k)| times_ik(c, k)),
        }
    }
    debug_assert_eq!(out.len(), n1 * n2 * n3);
    let parity = if dir == Direction::Z {
        f.parity().flipped()
    } else {
        f.parity()
    };
    ScalarField::from_coeffs(geom, out, parity, true).expect("same shape")
}

/// `d v1 / d x1 + d v2 / d x2`.
pub fn divergence_h(v1: &ScalarField, v2: &ScalarField) -> ScalarField {
    let mut d = derivative(v1, Direction::X1);
    d.axpy(1.0, &derivative(v2, Direction::X2));
    d
}

/// Full 3D Laplacian `Delta + d_zz`, symbol `-lambda(k)`.
pub fn laplacian3(f: &ScalarField) -> ScalarField {
    let geom = *f.geometry();
    let g = geom.grid;
    let [n1, n2, n3] = g.dims();
    let mut out = f.coeffs().to_vec();
    for i1 in 0..n1 {
        for i2 in 0..n2 {
            for i3 in 0..n3 {
                out[g.index(i1, i2, i3)] *= -geom.lambda(i1, i2, i3);
            }
        }
    }
    ScalarField::from_coeffs(geom, out, f.parity(), true).expect("same shape")
}

/// Relative tolerance on the `m = 0` plane accepted by [`vertical_integral`].
pub const Z_MEAN_TOLERANCE: f64 = 1e-12;

/// `F(x, z) = int_0^z f(x, xi) d xi` computed mode by mode.
///
/// Mode `e^{i kz z}` maps to `(e^{i kz z} - 1) / (i kz)`; the constant part
/// is collected on the `m = 0` plane. The input must have zero `z`-mean for
/// every horizontal wavevector. Nyquist `m` modes are annihilated.
pub fn vertical_integral(f: &ScalarField) -> Result<ScalarField, SpectralError> {
    let geom = *f.geometry();
    let g = geom.grid;
    let [n1, n2, n3] = g.dims();
    let c = f.coeffs();
    let scale = f.max_abs();
    for i1 in 0..n1 {
        for i2 in 0..n2 {
            let z_mean = c[g.index(i1, i2, 0)].norm();
            if z_mean > Z_MEAN_TOLERANCE * scale && z_mean > 0.0 {
                return Err(SpectralError::NonzeroZMean {
                    k1: g.freq(0, i1),
                    k2: g.freq(1, i2),
                    magnitude: z_mean,
                });
            }
        }
    }
    let mut out = vec![Complex64::default(); g.len()];
    let half = n3 / 2;
    let inv_kz: Vec<Complex64> = (0..half)
        .map(|m| if m == 0 { Complex64::default() } else { Complex64::new(0.0, -1.0 / geom.wavenumber(2, m)) })
        .collect();
    for i1 in 0..n1 {
        for i2 in 0..n2 {
            let base = g.index(i1, i2, 0);
            let mut constant = Complex64::default();
            // pair m with -m so even inputs give an exactly vanishing constant
            for m in 1..half {
                let inv = inv_kz[m]; // 1 / (i kz)
                let cp = c[base + m] * inv;
                let cm = c[base + (n3 - m)] * (-inv);
                out[base + m] = cp;
                out[base + (n3 - m)] = cm;
                constant -= cp + cm;
            }
            out[base] = constant;
        }
    }
    Ok(ScalarField::from_coeffs(geom, out, f.parity().flipped(), false)?)
}

/// 2/3-rule truncation: zeroes every coefficient with some `|k_i| > cutoff_i`.
pub fn dealias(f: &ScalarField) -> ScalarField {
    let mut out = f.clone();
    dealias_in_place(&mut out);
    out
}

pub fn dealias_in_place(f: &mut ScalarField) {
    let g = f.geometry().grid;
    let [n1, n2, n3] = g.dims();
    let cut = g.cutoffs();
    let coeffs = f.coeffs_mut();
    for i1 in 0..n1 {
        let o1 = g.freq(0, i1).unsigned_abs() as usize > cut[0];
        for i2 in 0..n2 {
            let o2 = o1 || g.freq(1, i2).unsigned_abs() as usize > cut[1];
            let row = &mut coeffs[g.index(i1, i2, 0)..g.index(i1, i2, 0) + n3];
            if o2 {
                row.fill(Complex64::default());
            } else {
                // frequencies cut+1 ..= n3-cut-1 sit in the middle of the row
                row[cut[2] + 1..n3 - cut[2]].fill(Complex64::default());
            }
        }
    }
}

/// Keeps only the `m = 0` plane (the vertical average).
pub fn z_mean(f: &ScalarField) -> ScalarField {
    let geom = *f.geometry();
    let g = geom.grid;
    let mut out = ScalarField::zeros(geom, Parity::Even).with_tags(Parity::Even, f.is_mean_zero());
    let [n1, n2, _] = g.dims();
    for i1 in 0..n1 {
        for i2 in 0..n2 {
            let idx = g.index(i1, i2, 0);
            out.coeffs_mut()[idx] = f.coeffs()[idx];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::spectral::{Domain, Geometry, Grid};

    fn geom(n: usize) -> Geometry {
        Geometry::new(Domain::periodic_2pi(), Grid::cubic(n).unwrap())
    }

    fn max_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn derivative_of_cosine() {
        let g = Geometry::new(Domain::new(3.0, 2.0, 5.0).unwrap(), Grid::cubic(16).unwrap());
        let f = ScalarField::from_fn(g, |x, _, _| (2.0 * PI * x / 3.0).cos());
        let d = derivative(&f, Direction::X1).to_physical();
        let expect = g.sample(|x, _, _| -(2.0 * PI / 3.0) * (2.0 * PI * x / 3.0).sin());
        assert!(max_diff(&d, &expect) < 1e-12);
    }

    #[test]
    fn laplacian_symbol() {
        let g = Geometry::new(Domain::new(1.0, 2.0, 3.0).unwrap(), Grid::cubic(16).unwrap());
        let mut f = ScalarField::zeros(g, Parity::None);
        f.set_coeff(2, -1, 3, Complex64::new(1.0, 0.5));
        let l = laplacian3(&f);
        let sym = -((2.0 * PI * 2.0 / 1.0).powi(2)
            + (2.0 * PI * 1.0 / 2.0).powi(2)
            + (2.0 * PI * 3.0 / 3.0).powi(2));
        let c = l.coeff(2, -1, 3);
        assert!((c - Complex64::new(1.0, 0.5) * sym).norm() < 1e-12 * sym.abs());
    }

    #[test]
    fn divergence_example() {
        // div_h (cos z sin x1, 0) = cos z cos x1
        let g = geom(16);
        let v1 = ScalarField::from_fn(g, |x, _, z| z.cos() * x.sin());
        let v2 = ScalarField::zeros(g, Parity::Even);
        let d = divergence_h(&v1, &v2).to_physical();
        let expect = g.sample(|x, _, z| z.cos() * x.cos());
        assert!(max_diff(&d, &expect) < 1e-12);
    }

    #[test]
    fn vertical_integral_analytic() {
        let g = Geometry::new(Domain::new(2.0, 2.0, 3.0).unwrap(), Grid::cubic(16).unwrap());
        let k = 2.0 * PI / 3.0;
        let c = ScalarField::from_fn(g, |_, _, z| (k * z).cos()).with_tags(Parity::Even, true);
        let ic = vertical_integral(&c).unwrap();
        assert_eq!(ic.parity(), Parity::Odd);
        assert!(max_diff(&ic.to_physical(), &g.sample(|_, _, z| (k * z).sin() / k)) < 1e-12);

        let s = ScalarField::from_fn(g, |_, _, z| (k * z).sin()).with_tags(Parity::Odd, true);
        let is = vertical_integral(&s).unwrap();
        assert_eq!(is.parity(), Parity::Even);
        assert!(max_diff(&is.to_physical(), &g.sample(|_, _, z| (1.0 - (k * z).cos()) / k)) < 1e-12);
    }

    #[test]
    fn vertical_integral_rejects_z_mean() {
        let g = geom(8);
        let f = ScalarField::from_fn(g, |x, _, z| x.cos() + z.sin());
        assert!(matches!(
            vertical_integral(&f),
            Err(SpectralError::NonzeroZMean { k1: 1, .. }) | Err(SpectralError::NonzeroZMean { k1: -1, .. })
        ));
    }

    #[test]
    fn dealias_cuts_outside_band() {
        let g = geom(16); // cutoff 5
        let mut f = ScalarField::zeros(g, Parity::None);
        f.set_coeff(5, 0, -5, Complex64::new(1.0, 0.0));
        f.set_coeff(6, 0, 0, Complex64::new(1.0, 0.0));
        f.set_coeff(0, -7, 1, Complex64::new(1.0, 0.0));
        let d = dealias(&f);
        assert_eq!(d.coeff(5, 0, -5), Complex64::new(1.0, 0.0));
        assert_eq!(d.coeff(6, 0, 0), Complex64::default());
        assert_eq!(d.coeff(0, -7, 1), Complex64::default());
    }
}

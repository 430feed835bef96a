//! Box dimensions and collocation grids.

use std::f64::consts::PI;

use super::SpectralError;

/// The periodic box `(0,L1) x (0,L2) x (-L3/2, L3/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
}

impl Domain {
    pub fn new(l1: f64, l2: f64, l3: f64) -> Result<Self, SpectralError> {
        for (name, l) in [("L1", l1), ("L2", l2), ("L3", l3)] {
            if !(l.is_finite() && l > 0.0) {
                return Err(SpectralError::InvalidDomain(format!(
                    "{name} must be positive and finite, got {l}"
                )));
            }
        }
        Ok(Self { l1, l2, l3 })
    }

    /// The `(2 pi)^3` box.
    pub fn periodic_2pi() -> Self {
        Self {
            l1: 2.0 * PI,
            l2: 2.0 * PI,
            l3: 2.0 * PI,
        }
    }

    pub fn lengths(&self) -> [f64; 3] {
        [self.l1, self.l2, self.l3]
    }

    pub fn volume(&self) -> f64 {
        self.l1 * self.l2 * self.l3
    }
}

/// Collocation points per direction together with the 2/3-rule cutoffs.
///
/// The cutoff is the largest `K` with `3K < N`, so products of two band
/// limited fields never alias back into `|k| <= K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid {
    n: [usize; 3],
    cutoff: [usize; 3],
}

impl Grid {
    pub fn new(n1: usize, n2: usize, n3: usize) -> Result<Self, SpectralError> {
        let n = [n1, n2, n3];
        for (axis, &ni) in n.iter().enumerate() {
            if ni < 8 || ni % 2 != 0 {
                return Err(SpectralError::InvalidGrid(format!(
                    "N{} must be even and >= 8, got {ni}",
                    axis + 1
                )));
            }
            // keeps every index representable in the u32 checkpoint header
            if ni > 4096 {
                return Err(SpectralError::InvalidGrid(format!(
                    "N{} = {ni} exceeds the supported maximum of 4096",
                    axis + 1
                )));
            }
        }
        let cutoff = n.map(|ni| (ni - 1) / 3);
        Ok(Self { n, cutoff })
    }

    pub fn cubic(n: usize) -> Result<Self, SpectralError> {
        Self::new(n, n, n)
    }

    pub fn dims(&self) -> [usize; 3] {
        self.n
    }

    pub fn cutoffs(&self) -> [usize; 3] {
        self.cutoff
    }

    pub fn len(&self) -> usize {
        self.n[0] * self.n[1] * self.n[2]
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn index(&self, i1: usize, i2: usize, i3: usize) -> usize {
        (i1 * self.n[1] + i2) * self.n[2] + i3
    }

    #[inline]
    pub fn unravel(&self, idx: usize) -> [usize; 3] {
        let i3 = idx % self.n[2];
        let rest = idx / self.n[2];
        [rest / self.n[1], rest % self.n[1], i3]
    }

    /// Signed frequency of storage index `i` along `axis` (standard FFT layout).
    #[inline]
    pub fn freq(&self, axis: usize, i: usize) -> i64 {
        let n = self.n[axis];
        if i < n / 2 {
            i as i64
        } else {
            i as i64 - n as i64
        }
    }

    /// Storage index of signed frequency `k`, if representable.
    #[inline]
    pub fn slot(&self, axis: usize, k: i64) -> Option<usize> {
        let n = self.n[axis] as i64;
        if k >= -(n / 2) && k < n / 2 {
            Some(k.rem_euclid(n) as usize)
        } else {
            None
        }
    }

    /// Storage index of the mirrored frequency `-k`.
    #[inline]
    pub fn mirror(&self, axis: usize, i: usize) -> usize {
        if i == 0 {
            0
        } else {
            self.n[axis] - i
        }
    }

    #[inline]
    pub fn is_nyquist(&self, axis: usize, i: usize) -> bool {
        i == self.n[axis] / 2
    }

    /// Flat index of `-k` for the flat index of `k`.
    #[inline]
    pub fn mirror_flat(&self, idx: usize) -> usize {
        let [i1, i2, i3] = self.unravel(idx);
        self.index(self.mirror(0, i1), self.mirror(1, i2), self.mirror(2, i3))
    }

    /// Flat index of `(k1, k2, -m)`.
    #[inline]
    pub fn flip_z_flat(&self, idx: usize) -> usize {
        let [i1, i2, i3] = self.unravel(idx);
        self.index(i1, i2, self.mirror(2, i3))
    }

    #[inline]
    pub fn in_band(&self, i1: usize, i2: usize, i3: usize) -> bool {
        self.freq(0, i1).unsigned_abs() as usize <= self.cutoff[0]
            && self.freq(1, i2).unsigned_abs() as usize <= self.cutoff[1]
            && self.freq(2, i3).unsigned_abs() as usize <= self.cutoff[2]
    }
}

/// A domain paired with a grid; everything a spectral field needs to know
/// about where it lives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    pub domain: Domain,
    pub grid: Grid,
}

impl Geometry {
    pub fn new(domain: Domain, grid: Grid) -> Self {
        Self { domain, grid }
    }

    /// Physical wavenumber `2 pi k / L` for storage index `i` along `axis`.
    #[inline]
    pub fn wavenumber(&self, axis: usize, i: usize) -> f64 {
        2.0 * PI * self.grid.freq(axis, i) as f64 / self.domain.lengths()[axis]
    }

    /// Wavenumber used for first derivatives: the Nyquist frequency has no
    /// real-valued derivative and is mapped to zero.
    #[inline]
    pub fn derivative_wavenumber(&self, axis: usize, i: usize) -> f64 {
        if self.grid.is_nyquist(axis, i) {
            0.0
        } else {
            self.wavenumber(axis, i)
        }
    }

    /// Fourier symbol of `-Delta_{x,z}`.
    #[inline]
    pub fn lambda(&self, i1: usize, i2: usize, i3: usize) -> f64 {
        let a = self.wavenumber(0, i1);
        let b = self.wavenumber(1, i2);
        let c = self.wavenumber(2, i3);
        a * a + b * b + c * c
    }

    /// Table of `lambda` over all flat indices.
    pub fn lambda_table(&self) -> Vec<f64> {
        let [n1, n2, n3] = self.grid.dims();
        let mut out = Vec::with_capacity(self.grid.len());
        for i1 in 0..n1 {
            for i2 in 0..n2 {
                for i3 in 0..n3 {
                    out.push(self.lambda(i1, i2, i3));
                }
            }
        }
        out
    }

    /// Physical coordinates of collocation point `(j1, j2, j3)`; `z` is
    /// taken modulo `L3`, so the samples start at `z = 0`.
    pub fn point(&self, j1: usize, j2: usize, j3: usize) -> [f64; 3] {
        let [n1, n2, n3] = self.grid.dims();
        [
            j1 as f64 * self.domain.l1 / n1 as f64,
            j2 as f64 * self.domain.l2 / n2 as f64,
            j3 as f64 * self.domain.l3 / n3 as f64,
        ]
    }

    /// Samples a function of `(x1, x2, z)` on the grid.
    pub fn sample<F: Fn(f64, f64, f64) -> f64>(&self, f: F) -> Vec<f64> {
        let [n1, n2, n3] = self.grid.dims();
        let mut out = Vec::with_capacity(self.grid.len());
        for j1 in 0..n1 {
            for j2 in 0..n2 {
                for j3 in 0..n3 {
                    let [x, y, z] = self.point(j1, j2, j3);
                    out.push(f(x, y, z));
                }
            }
        }
        out
    }

    /// Grid spacing per direction.
    pub fn spacing(&self) -> [f64; 3] {
        let [n1, n2, n3] = self.grid.dims();
        [
            self.domain.l1 / n1 as f64,
            self.domain.l2 / n2 as f64,
            self.domain.l3 / n3 as f64,
        ]
    }
}

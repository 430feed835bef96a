//! Separable 3D complex FFT over row-major `(k1, k2, m)` storage.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::Grid;

struct Plans {
    forward: [Arc<dyn Fft<f64>>; 3],
    inverse: [Arc<dyn Fft<f64>>; 3],
}

fn plans(grid: &Grid) -> Arc<Plans> {
    static CACHE: OnceLock<Mutex<HashMap<[usize; 3], Arc<Plans>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    guard
        .entry(grid.dims())
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            let [n1, n2, n3] = grid.dims();
            Arc::new(Plans {
                forward: [
                    planner.plan_fft_forward(n1),
                    planner.plan_fft_forward(n2),
                    planner.plan_fft_forward(n3),
                ],
                inverse: [
                    planner.plan_fft_inverse(n1),
                    planner.plan_fft_inverse(n2),
                    planner.plan_fft_inverse(n3),
                ],
            })
        })
        .clone()
}

/// Which coefficients may be nonzero on input (inverse) or are wanted on
/// output (forward).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Support {
    Full,
    /// Only the dealiased band; lines that are known to vanish are skipped.
    Band,
}

fn band_mask(grid: &Grid, axis: usize) -> Vec<bool> {
    let cut = grid.cutoffs()[axis];
    (0..grid.dims()[axis])
        .map(|i| grid.freq(axis, i).unsigned_abs() as usize <= cut)
        .collect()
}

struct Workspace {
    buf: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

fn axis3(plan: &Arc<dyn Fft<f64>>, grid: &Grid, data: &mut [Complex64], support: Support, ws: &mut Workspace) {
    let [n1, n2, n3] = grid.dims();
    match support {
        Support::Full => plan.process_with_scratch(data, &mut ws.scratch),
        Support::Band => {
            let m1 = band_mask(grid, 0);
            let m2 = band_mask(grid, 1);
            for i1 in (0..n1).filter(|&i| m1[i]) {
                for i2 in (0..n2).filter(|&i| m2[i]) {
                    let start = (i1 * n2 + i2) * n3;
                    plan.process_with_scratch(&mut data[start..start + n3], &mut ws.scratch);
                }
            }
        }
    }
}

fn axis2(plan: &Arc<dyn Fft<f64>>, grid: &Grid, data: &mut [Complex64], support: Support, ws: &mut Workspace) {
    let [n1, n2, n3] = grid.dims();
    let m1 = band_mask(grid, 0);
    for i1 in 0..n1 {
        if support == Support::Band && !m1[i1] {
            continue;
        }
        let slab = &mut data[i1 * n2 * n3..(i1 + 1) * n2 * n3];
        for i2 in 0..n2 {
            for i3 in 0..n3 {
                ws.buf[i3 * n2 + i2] = slab[i2 * n3 + i3];
            }
        }
        plan.process_with_scratch(&mut ws.buf[..n2 * n3], &mut ws.scratch);
        for i2 in 0..n2 {
            for i3 in 0..n3 {
                slab[i2 * n3 + i3] = ws.buf[i3 * n2 + i2];
            }
        }
    }
}

fn axis1(plan: &Arc<dyn Fft<f64>>, grid: &Grid, data: &mut [Complex64], ws: &mut Workspace) {
    let [n1, n2, n3] = grid.dims();
    let stride = n2 * n3;
    for i2 in 0..n2 {
        for i1 in 0..n1 {
            let row = &data[i1 * stride + i2 * n3..i1 * stride + (i2 + 1) * n3];
            for (i3, &c) in row.iter().enumerate() {
                ws.buf[i3 * n1 + i1] = c;
            }
        }
        plan.process_with_scratch(&mut ws.buf[..n1 * n3], &mut ws.scratch);
        for i1 in 0..n1 {
            let row = &mut data[i1 * stride + i2 * n3..i1 * stride + (i2 + 1) * n3];
            for (i3, c) in row.iter_mut().enumerate() {
                *c = ws.buf[i3 * n1 + i1];
            }
        }
    }
}

fn transform(grid: &Grid, data: &mut [Complex64], inverse: bool, support: Support) {
    assert_eq!(data.len(), grid.len());
    let p = plans(grid);
    let set = if inverse { &p.inverse } else { &p.forward };
    let [n1, n2, n3] = grid.dims();
    let scratch_len = set.iter().map(|f| f.get_inplace_scratch_len()).max().unwrap_or(0);
    let mut ws = Workspace {
        buf: vec![Complex64::default(); n3 * n1.max(n2)],
        scratch: vec![Complex64::default(); scratch_len],
    };
    if inverse {
        axis3(&set[2], grid, data, support, &mut ws);
        axis2(&set[1], grid, data, support, &mut ws);
        axis1(&set[0], grid, data, &mut ws);
    } else {
        axis1(&set[0], grid, data, &mut ws);
        axis2(&set[1], grid, data, support, &mut ws);
        axis3(&set[2], grid, data, support, &mut ws);
    }
}

/// Physical samples to coefficients `c_k` with `f(x) = sum_k c_k e^{i k.x}`.
pub fn forward(grid: &Grid, data: &mut [Complex64]) {
    transform(grid, data, false, Support::Full);
    let scale = 1.0 / grid.len() as f64;
    for c in data.iter_mut() {
        *c *= scale;
    }
}

/// Coefficients to physical samples (unnormalized synthesis).
pub fn inverse(grid: &Grid, data: &mut [Complex64]) {
    transform(grid, data, true, Support::Full);
}

/// Real samples to spectral coefficients.
pub fn forward_real(grid: &Grid, samples: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    forward(grid, &mut buf);
    buf
}

/// Spectral coefficients to real samples; the imaginary part is dropped.
pub fn inverse_real(grid: &Grid, coeffs: &[Complex64]) -> Vec<f64> {
    let mut buf = coeffs.to_vec();
    inverse(grid, &mut buf);
    buf.into_iter().map(|c| c.re).collect()
}

/// Synthesizes two real fields with one complex transform. Both inputs
/// must be Hermitian (coefficients of real fields).
pub fn inverse_real_pair(grid: &Grid, a: &[Complex64], b: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
    inverse_pair(grid, a, b, Support::Full)
}

/// [`inverse_real_pair`] for inputs supported in the dealiased band.
pub fn inverse_real_pair_band(grid: &Grid, a: &[Complex64], b: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
    inverse_pair(grid, a, b, Support::Band)
}

fn inverse_pair(grid: &Grid, a: &[Complex64], b: &[Complex64], support: Support) -> (Vec<f64>, Vec<f64>) {
    let mut buf: Vec<Complex64> = a
        .iter()
        .zip(b)
        .map(|(x, y)| Complex64::new(x.re - y.im, x.im + y.re))
        .collect();
    transform(grid, &mut buf, true, support);
    let mut re = Vec::with_capacity(buf.len());
    let mut im = Vec::with_capacity(buf.len());
    for c in buf {
        re.push(c.re);
        im.push(c.im);
    }
    (re, im)
}

/// Analyzes two real sample arrays with one complex transform.
pub fn forward_real_pair(grid: &Grid, x: &[f64], y: &[f64]) -> (Vec<Complex64>, Vec<Complex64>) {
    forward_pair(grid, x, y, Support::Full)
}

/// [`forward_real_pair`] followed by dealiasing, computing only the
/// coefficients inside the band.
pub fn forward_real_pair_band(grid: &Grid, x: &[f64], y: &[f64]) -> (Vec<Complex64>, Vec<Complex64>) {
    forward_pair(grid, x, y, Support::Band)
}

fn forward_pair(grid: &Grid, x: &[f64], y: &[f64], support: Support) -> (Vec<Complex64>, Vec<Complex64>) {
    let mut buf: Vec<Complex64> = x.iter().zip(y).map(|(&a, &b)| Complex64::new(a, b)).collect();
    transform(grid, &mut buf, false, support);
    let scale = 1.0 / grid.len() as f64;
    let [n1, n2, n3] = grid.dims();
    let masks = [band_mask(grid, 0), band_mask(grid, 1), band_mask(grid, 2)];
    let keep = |axis: usize, i: usize| support == Support::Full || masks[axis][i];
    let mut a = vec![Complex64::default(); buf.len()];
    let mut b = vec![Complex64::default(); buf.len()];
    for i1 in (0..n1).filter(|&i| keep(0, i)) {
        let j1 = grid.mirror(0, i1);
        for i2 in (0..n2).filter(|&i| keep(1, i)) {
            let j2 = grid.mirror(1, i2);
            let row = grid.index(i1, i2, 0);
            let mrow = grid.index(j1, j2, 0);
            for i3 in (0..n3).filter(|&i| keep(2, i)) {
                let idx = row + i3;
                let c = buf[idx] * scale;
                let d = buf[mrow + grid.mirror(2, i3)].conj() * scale;
                a[idx] = 0.5 * (c + d);
                // (c - d) / (2i)
                let e = 0.5 * (c - d);
                b[idx] = Complex64::new(e.im, -e.re);
            }
        }
    }
    (a, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft(grid: &Grid, samples: &[f64]) -> Vec<Complex64> {
        use std::f64::consts::PI;
        let [n1, n2, n3] = grid.dims();
        let mut out = vec![Complex64::default(); grid.len()];
        for k1 in 0..n1 {
            for k2 in 0..n2 {
                for k3 in 0..n3 {
                    let mut acc = Complex64::default();
                    for j1 in 0..n1 {
                        for j2 in 0..n2 {
                            for j3 in 0..n3 {
                                let ph = -2.0
                                    * PI
                                    * ((k1 * j1) as f64 / n1 as f64
                                        + (k2 * j2) as f64 / n2 as f64
                                        + (k3 * j3) as f64 / n3 as f64);
                                acc += samples[grid.index(j1, j2, j3)] * Complex64::from_polar(1.0, ph);
                            }
                        }
                    }
                    out[grid.index(k1, k2, k3)] = acc / grid.len() as f64;
                }
            }
        }
        out
    }

    fn pseudo_random(n: usize, seed: u64) -> Vec<f64> {
        let mut s = seed;
        (0..n)
            .map(|_| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
            })
            .collect()
    }

    #[test]
    fn matches_naive_dft_on_anisotropic_grid() {
        let grid = Grid::new(8, 10, 12).unwrap();
        let x = pseudo_random(grid.len(), 7);
        let fast = forward_real(&grid, &x);
        let slow = naive_dft(&grid, &x);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn pair_transforms_match_single() {
        let grid = Grid::new(8, 8, 10).unwrap();
        let x = pseudo_random(grid.len(), 1);
        let y = pseudo_random(grid.len(), 2);
        let (a, b) = forward_real_pair(&grid, &x, &y);
        let a1 = forward_real(&grid, &x);
        let b1 = forward_real(&grid, &y);
        for i in 0..grid.len() {
            assert!((a[i] - a1[i]).norm() < 1e-14);
            assert!((b[i] - b1[i]).norm() < 1e-14);
        }
        let (xr, yr) = inverse_real_pair(&grid, &a, &b);
        for i in 0..grid.len() {
            assert!((xr[i] - x[i]).abs() < 1e-13);
            assert!((yr[i] - y[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn band_transforms_match_full_ones() {
        let grid = Grid::new(8, 10, 12).unwrap();
        let x = pseudo_random(grid.len(), 3);
        let y = pseudo_random(grid.len(), 4);
        let (a, b) = forward_real_pair(&grid, &x, &y);
        let (ab, bb) = forward_real_pair_band(&grid, &x, &y);
        let masks = [band_mask(&grid, 0), band_mask(&grid, 1), band_mask(&grid, 2)];
        let mut a_cut = a.clone();
        let mut b_cut = b.clone();
        for idx in 0..grid.len() {
            let [i1, i2, i3] = grid.unravel(idx);
            if !(masks[0][i1] && masks[1][i2] && masks[2][i3]) {
                a_cut[idx] = Complex64::default();
                b_cut[idx] = Complex64::default();
            }
        }
        for i in 0..grid.len() {
            assert!((ab[i] - a_cut[i]).norm() < 1e-15);
            assert!((bb[i] - b_cut[i]).norm() < 1e-15);
        }
        let (xf, yf) = inverse_real_pair(&grid, &a_cut, &b_cut);
        let (xb, yb) = inverse_real_pair_band(&grid, &a_cut, &b_cut);
        for i in 0..grid.len() {
            assert!((xf[i] - xb[i]).abs() < 1e-14);
            assert!((yf[i] - yb[i]).abs() < 1e-14);
        }
    }
}

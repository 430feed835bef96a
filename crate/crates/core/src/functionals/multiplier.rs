use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::FunctionalsError;
use crate::spectral::Geometry;

/// Named choices of the symbol `kappa(k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum MultiplierPreset {
    Identity,
    /// `1 + cos(pi lambda / lambda_max) / 2`.
    Smooth,
    /// Independent uniform draws in `[min, max]`, one per wavevector orbit.
    Random { seed: u64, min: f64, max: f64 },
}

/// A self-adjoint operator `K` acting diagonally in Fourier space.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierK {
    symbol: Vec<f64>,
    min: f64,
    max: f64,
}

impl MultiplierK {
    /// Checks positivity, finiteness and invariance under `k -> -k` and
    /// `m -> -m`.
    pub fn from_symbol(geom: &Geometry, symbol: Vec<f64>) -> Result<Self, FunctionalsError> {
        let g = geom.grid;
        if symbol.len() != g.len() {
            return Err(FunctionalsError::InvalidMultiplier(format!(
                "symbol has {} entries, grid has {}",
                symbol.len(),
                g.len()
            )));
        }
        let mut min = f64::INFINITY;
        let mut max: f64 = 0.0;
        for (idx, &s) in symbol.iter().enumerate() {
            if !(s.is_finite() && s > 0.0) {
                return Err(FunctionalsError::InvalidMultiplier(format!(
                    "symbol value {s} at index {idx} is not positive and finite"
                )));
            }
            if s != symbol[g.mirror_flat(idx)] || s != symbol[g.flip_z_flat(idx)] {
                return Err(FunctionalsError::InvalidMultiplier(format!(
                    "symbol is not symmetric at index {idx}"
                )));
            }
            min = min.min(s);
            max = max.max(s);
        }
        Ok(Self { symbol, min, max })
    }

    pub fn preset(geom: &Geometry, preset: MultiplierPreset) -> Result<Self, FunctionalsError> {
        let g = geom.grid;
        let [n1, n2, n3] = g.dims();
        let mut symbol = vec![1.0; g.len()];
        match preset {
            MultiplierPreset::Identity => {}
            MultiplierPreset::Smooth => {
                let lambda = geom.lambda_table();
                let lambda_max = (0..g.len())
                    .filter(|&i| {
                        let [i1, i2, i3] = g.unravel(i);
                        g.in_band(i1, i2, i3)
                    })
                    .map(|i| lambda[i])
                    .fold(0.0, f64::max);
                for (s, l) in symbol.iter_mut().zip(&lambda) {
                    *s = 1.0 + 0.5 * (std::f64::consts::PI * (l / lambda_max).min(1.0)).cos();
                }
            }
            MultiplierPreset::Random { seed, min, max } => {
                if !(min > 0.0 && min <= max && max.is_finite()) {
                    return Err(FunctionalsError::InvalidMultiplier(format!(
                        "random symbol bounds [{min}, {max}] must satisfy 0 < min <= max < inf"
                    )));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut assigned = vec![false; g.len()];
                for i1 in 0..n1 {
                    for i2 in 0..n2 {
                        for i3 in 0..n3 {
                            let idx = g.index(i1, i2, i3);
                            if assigned[idx] || !g.in_band(i1, i2, i3) {
                                continue;
                            }
                            let value = if min == max { min } else { rng.gen_range(min..=max) };
                            let mirror = g.mirror_flat(idx);
                            for j in [idx, mirror, g.flip_z_flat(idx), g.flip_z_flat(mirror)] {
                                symbol[j] = value;
                                assigned[j] = true;
                            }
                        }
                    }
                }
            }
        }
        Self::from_symbol(geom, symbol)
    }

    pub fn symbol(&self) -> &[f64] {
        &self.symbol
    }

    pub fn inverse_symbol(&self) -> Vec<f64> {
        self.symbol.iter().map(|s| 1.0 / s).collect()
    }

    /// `||K||_{H -> H}`, the largest symbol value.
    pub fn norm(&self) -> f64 {
        self.max
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.min, self.max)
    }
}

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::AssimilationError;

/// Relative slack allowed when checking a gap against its bounds.
const GAP_SLACK: f64 = 1e-12;

/// Observation times `t_0 < t_1 < ...` with every gap in `[alpha, beta]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSchedule {
    times: Vec<f64>,
    alpha: f64,
    beta: f64,
}

impl ObservationSchedule {
    pub fn new(times: Vec<f64>, alpha: f64, beta: f64) -> Result<Self, AssimilationError> {
        if !(alpha.is_finite() && beta.is_finite() && alpha > 0.0 && alpha <= beta) {
            return Err(AssimilationError::Schedule(format!(
                "gap bounds must satisfy 0 < alpha <= beta, got alpha = {alpha}, beta = {beta}"
            )));
        }
        if times.is_empty() || times.iter().any(|t| !t.is_finite()) {
            return Err(AssimilationError::Schedule("times must be finite and non-empty".into()));
        }
        for (n, w) in times.windows(2).enumerate() {
            let gap = w[1] - w[0];
            if gap < alpha * (1.0 - GAP_SLACK) || gap > beta * (1.0 + GAP_SLACK) {
                return Err(AssimilationError::Schedule(format!(
                    "gap {gap} between t_{n} and t_{} lies outside [{alpha}, {beta}]",
                    n + 1
                )));
            }
        }
        Ok(Self { times, alpha, beta })
    }

    /// `t_n = t0 + n * gap` for `n = 0..=steps`.
    pub fn uniform(t0: f64, gap: f64, steps: usize) -> Result<Self, AssimilationError> {
        let times = (0..=steps).map(|n| t0 + n as f64 * gap).collect();
        Self::new(times, gap, gap)
    }

    /// Gaps drawn uniformly from `[alpha, beta]` with a seeded generator.
    pub fn jittered(t0: f64, alpha: f64, beta: f64, steps: usize, seed: u64) -> Result<Self, AssimilationError> {
        if !(alpha > 0.0 && alpha <= beta) {
            return Self::new(vec![t0], alpha, beta);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut times = Vec::with_capacity(steps + 1);
        let mut t = t0;
        times.push(t);
        for _ in 0..steps {
            t += if alpha == beta { alpha } else { rng.gen_range(alpha..=beta) };
            times.push(t);
        }
        Self::new(times, alpha, beta)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Number of assimilation steps (one fewer than the number of times).
    pub fn steps(&self) -> usize {
        self.times.len() - 1
    }

    pub fn gaps(&self) -> Vec<f64> {
        self.times.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn start(&self) -> f64 {
        self.times[0]
    }

    pub fn end(&self) -> f64 {
        *self.times.last().expect("non-empty")
    }
}

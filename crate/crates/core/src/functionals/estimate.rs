use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::interpolation::{GramProjector, InterpolationOperator};
use super::FunctionalsError;
use crate::spectral::{Geometry, Space, StateVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerIterationConfig {
    pub max_iterations: usize,
    /// Target for the relative eigen-residual `||M w - rho w|| / rho`.
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for PowerIterationConfig {
    fn default() -> Self {
        Self {
            max_iterations: 3000,
            tolerance: 1e-8,
            seed: 0x5eed,
        }
    }
}

/// A numerical estimate together with its convergence evidence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// Largest eigenvalue of a self-adjoint, positive semi-definite map on the
/// constrained space, returned as `(eigenvalue, residual, iterations)`.
fn power_iteration<F>(geom: Geometry, config: &PowerIterationConfig, mut apply: F) -> Result<Estimate, FunctionalsError>
where
    F: FnMut(&StateVector) -> StateVector,
{
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut w = StateVector::random(geom, &mut rng, f64::INFINITY, 0.0);
    let mut y = apply(&w);
    let start = w.norm(Space::H);
    if y.norm(Space::H) <= 1e-14 * start {
        // recheck once from the image, in case the start vector was unlucky
        w = apply(&StateVector::random(geom, &mut rng, f64::INFINITY, 0.0));
        if w.norm(Space::H) <= 1e-14 * start {
            return Ok(Estimate {
                value: 0.0,
                residual: 0.0,
                iterations: 1,
            });
        }
        y = apply(&w);
    }
    let mut estimate = Estimate {
        value: 0.0,
        residual: f64::INFINITY,
        iterations: 0,
    };
    for it in 1..=config.max_iterations {
        let nw = w.norm(Space::H);
        w.scale(1.0 / nw);
        y.scale(1.0 / nw);
        let rho = w.inner_product(&y, Space::H);
        let mut r = y.clone();
        r.axpy(-rho, &w);
        let residual = if rho > 0.0 { r.norm(Space::H) / rho } else { 0.0 };
        estimate = Estimate {
            value: rho.max(0.0),
            residual,
            iterations: it,
        };
        if residual <= config.tolerance || rho <= 0.0 {
            return Ok(estimate);
        }
        w = y;
        y = apply(&w);
    }
    Err(FunctionalsError::NonConvergence {
        value: estimate.value,
        residual: estimate.residual,
        iterations: estimate.iterations,
    })
}

fn lambda_power(geom: &Geometry, exponent: f64) -> Vec<f64> {
    geom.lambda_table()
        .into_iter()
        .map(|l| if l > 0.0 { l.powf(exponent) } else { 0.0 })
        .collect()
}

/// `sup { ||u||_H : ||u||_V <= 1, l(u) = 0 for every l in L }` on the
/// dealiased truncation, for `V` one of `W1`, `W2`.
pub fn estimate_completeness_defect(
    op: &InterpolationOperator,
    space: Space,
    config: &PowerIterationConfig,
) -> Result<Estimate, FunctionalsError> {
    let geom = *op.geometry();
    let s = space.order() as f64;
    if s <= 0.0 {
        return Err(FunctionalsError::InvalidRequest("the defect needs V = W1 or W2".into()));
    }
    // in the variable w = A^{s/2} u the constraint reads (A^{-s/2} g_j, w) = 0
    let half = lambda_power(&geom, -0.5 * s);
    let full = lambda_power(&geom, -s);
    let constraints = op.riesz_elements().iter().map(|g| g.apply_symbol(&half)).collect();
    let projector = GramProjector::new(geom, constraints)?;
    let est = power_iteration(geom, config, |w| {
        let mut y = projector.reject(w);
        y.apply_symbol(&full);
        projector.reject(&y)
    })?;
    Ok(Estimate {
        value: est.value.sqrt(),
        ..est
    })
}

/// `||I - R||_{V -> V}` on the dealiased truncation.
pub fn operator_norm(
    op: &InterpolationOperator,
    space: Space,
    config: &PowerIterationConfig,
) -> Result<Estimate, FunctionalsError> {
    let geom = *op.geometry();
    let s = space.order() as f64;
    let up = lambda_power(&geom, 0.5 * s);
    let down = lambda_power(&geom, -0.5 * s);
    // M = A^{s/2} (I - R) A^{-s/2}; iterate with M* M
    let est = power_iteration(geom, config, |w| {
        let mut x = w.clone();
        x.apply_symbol(&down);
        let mut x = op.residual(&x);
        x.apply_symbol(&up);
        x.apply_symbol(&up);
        let mut y = x.sub(&op.apply_adjoint(&x));
        y.apply_symbol(&down);
        y
    })?;
    Ok(Estimate {
        value: est.value.sqrt(),
        ..est
    })
}

/// `||R||_{W2 -> H}` on the dealiased truncation.
pub fn reconstruction_norm(op: &InterpolationOperator, config: &PowerIterationConfig) -> Result<Estimate, FunctionalsError> {
    let geom = *op.geometry();
    let down = lambda_power(&geom, -1.0);
    // M = R A^{-1}; iterate with M* M
    let est = power_iteration(geom, config, |w| {
        let mut x = w.clone();
        x.apply_symbol(&down);
        let mut y = op.apply_adjoint(&op.apply(&x));
        y.apply_symbol(&down);
        y
    })?;
    Ok(Estimate {
        value: est.value.sqrt(),
        ..est
    })
}

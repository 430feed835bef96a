use super::{IntegrationError, Integrator};
use crate::spectral::{Space, StateVector};

/// Stopping rule for [`spin_up`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinUpConfig {
    /// Length of the trailing window over which `max ||U||_W2` is taken.
    pub window: f64,
    /// Relative change of consecutive window maxima that counts as converged.
    pub tol: f64,
    pub max_time: f64,
    /// Window maxima below this level count as decay to rest.
    pub rest_floor: f64,
}

impl Default for SpinUpConfig {
    fn default() -> Self {
        Self {
            window: 2.0,
            tol: 0.05,
            max_time: 200.0,
            rest_floor: 1e-8,
        }
    }
}

/// State on the empirical absorbing ball.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinUp {
    pub state: StateVector,
    pub time: f64,
    /// Largest `||U||_W2` over the final window: the observed ball radius.
    pub radius: f64,
    /// Window maxima in order.
    pub trace: Vec<f64>,
}

/// Integrates until the running maximum of `||U||_W2` over consecutive
/// windows stabilizes to `tol` (or drops below `rest_floor`).
pub fn spin_up(
    integrator: &Integrator,
    u0: &StateVector,
    config: &SpinUpConfig,
) -> Result<SpinUp, IntegrationError> {
    if !(config.window > 0.0 && config.tol > 0.0 && config.max_time >= config.window) {
        return Err(IntegrationError::InvalidConfig(format!("spin-up settings {config:?}")));
    }
    let limit = integrator.blowup_limit(u0);
    let steps = integrator.steps_for(config.window);
    let h = config.window / steps as f64;
    let mut state = u0.clone();
    let mut time = 0.0;
    let mut trace = Vec::new();
    while time + 0.5 * config.window <= config.max_time {
        let mut window_max: f64 = 0.0;
        for _ in 0..steps {
            state = integrator.step_at(&state, h, time)?;
            time += h;
            let [_, w1, w2] = state.norms();
            if w1 > limit {
                return Err(IntegrationError::BlowUp { norm: w1, limit, time });
            }
            window_max = window_max.max(w2);
        }
        trace.push(window_max);
        let converged = window_max < config.rest_floor
            || (trace.len() >= 2 && {
                let prev = trace[trace.len() - 2];
                (window_max - prev).abs() <= config.tol * prev
            });
        if converged {
            return Ok(SpinUp {
                state,
                time,
                radius: window_max,
                trace,
            });
        }
    }
    Err(IntegrationError::NonConvergence {
        max_time: config.max_time,
        trace,
    })
}

/// `max_t ||S_t U - S_t U*||_H / ||U - U*||_H` over `samples` equally spaced
/// times in `(0, t_final]`; defined as 1 when `U = U*`.
pub fn lipschitz_probe(
    integrator: &Integrator,
    u: &StateVector,
    u_star: &StateVector,
    t_final: f64,
    samples: usize,
) -> Result<f64, IntegrationError> {
    let d0 = u.sub(u_star).norm(Space::H);
    if d0 == 0.0 {
        return Ok(1.0);
    }
    let times: Vec<f64> = (1..=samples.max(1))
        .map(|i| t_final * i as f64 / samples.max(1) as f64)
        .collect();
    let a = integrator.evolve(u, t_final, &times)?;
    let b = integrator.evolve(u_star, t_final, &times)?;
    let mut worst: f64 = 0.0;
    for (sa, sb) in a.samples().iter().zip(b.samples()).skip(1) {
        worst = worst.max(sa.state.sub(&sb.state).norm(Space::H) / d0);
    }
    Ok(worst)
}

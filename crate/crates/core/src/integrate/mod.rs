//! Time stepping of `d_t U + nu A U + B(U, U) + C U = G`.
//!
//! The scheme is the integrating-factor RK4 (Lawson) method: diffusion is
//! diagonal in Fourier space and is applied exactly through the factors
//! `exp(-nu lambda(k) h)`, everything else is advanced with classical RK4.

mod spinup;
mod trajectory;

use thiserror::Error;

pub use spinup::{lipschitz_probe, spin_up, SpinUp, SpinUpConfig};
pub use trajectory::{Sample, Trajectory};

use crate::model::{rhs_with_speeds, ModelError, PhysicalParams};
use crate::spectral::{Geometry, Space, StateVector};

/// Factor on the initial `W1` scale beyond which a run is declared blown up.
pub const BLOWUP_FACTOR: f64 = 1e6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntegrationError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("CFL number {cfl:.3} exceeds the guard {limit} at t = {time}")]
    Cfl { cfl: f64, limit: f64, time: f64 },
    #[error("non-finite state at t = {time}")]
    NonFinite { time: f64 },
    #[error("W1 norm {norm:e} exceeds {limit:e} at t = {time}")]
    BlowUp { norm: f64, limit: f64, time: f64 },
    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid sample times: {0}")]
    InvalidSamples(String),
    #[error("spin-up did not converge within t = {max_time}; last window maxima {trace:?}")]
    NonConvergence { max_time: f64, trace: Vec<f64> },
}

/// Time-stepping scheme. Only the integrating-factor RK4 is provided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    #[default]
    Ifrk4,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub scheme: Scheme,
    /// Upper bound on `dt * sum_i max|u_i| / dx_i`, checked every step.
    pub cfl_guard: f64,
}

impl IntegratorConfig {
    pub fn new(dt: f64, cfl_guard: f64) -> Result<Self, IntegrationError> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(IntegrationError::InvalidConfig(format!("dt must be positive, got {dt}")));
        }
        if !(cfl_guard.is_finite() && cfl_guard > 0.0) {
            return Err(IntegrationError::InvalidConfig(format!(
                "cfl_guard must be positive, got {cfl_guard}"
            )));
        }
        Ok(Self {
            dt,
            scheme: Scheme::Ifrk4,
            cfl_guard,
        })
    }
}

/// Realizes the evolution operator `S_t` for fixed physics.
#[derive(Debug, Clone)]
pub struct Integrator {
    params: PhysicalParams,
    config: IntegratorConfig,
    lambda: Vec<f64>,
}

impl Integrator {
    pub fn new(params: PhysicalParams, config: IntegratorConfig) -> Self {
        let lambda = params.forcing.field().geometry().lambda_table();
        Self { params, config, lambda }
    }

    pub fn params(&self) -> &PhysicalParams {
        &self.params
    }

    pub fn config(&self) -> &IntegratorConfig {
        &self.config
    }

    pub fn geometry(&self) -> &Geometry {
        self.params.forcing.field().geometry()
    }

    /// Same physics, different time step.
    pub fn with_dt(&self, dt: f64) -> Result<Self, IntegrationError> {
        let mut out = self.clone();
        out.config = IntegratorConfig::new(dt, self.config.cfl_guard)?;
        Ok(out)
    }

    fn decay(&self, h: f64) -> Vec<f64> {
        let nu = self.params.nu;
        self.lambda.iter().map(|l| (-nu * l * h).exp()).collect()
    }

    fn tendency(&self, u: &StateVector) -> Result<(StateVector, f64), IntegrationError> {
        let (t, s) = rhs_with_speeds(u, &self.params, false)?;
        let [dx1, dx2, dx3] = self.geometry().spacing();
        Ok((t.state, s.v1 / dx1 + s.v2 / dx2 + s.w / dx3))
    }

    /// One IFRK4 step of size `h`, followed by the symmetry projection.
    pub fn step(&self, u: &StateVector, h: f64) -> Result<StateVector, IntegrationError> {
        self.step_at(u, h, 0.0)
    }

    fn step_at(&self, u: &StateVector, h: f64, time: f64) -> Result<StateVector, IntegrationError> {
        let e_half = self.decay(0.5 * h);
        let e_full = self.decay(h);

        let (k1, rate) = self.tendency(u)?;
        let cfl = h * rate;
        if cfl > self.config.cfl_guard {
            return Err(IntegrationError::Cfl {
                cfl,
                limit: self.config.cfl_guard,
                time,
            });
        }

        let mut eu_half = u.clone();
        eu_half.apply_symbol(&e_half);

        let mut u2 = u.clone();
        u2.axpy(0.5 * h, &k1);
        u2.apply_symbol(&e_half);
        let (k2, _) = self.tendency(&u2)?;

        let mut u3 = eu_half.clone();
        u3.axpy(0.5 * h, &k2);
        let (k3, _) = self.tendency(&u3)?;

        let mut u4 = eu_half;
        u4.axpy(h, &k3);
        u4.apply_symbol(&e_half);
        let (k4, _) = self.tendency(&u4)?;

        // E(h) (u + h/6 k1) + h/3 E(h/2) (k2 + k3) + h/6 k4
        let mut out = u.clone();
        out.axpy(h / 6.0, &k1);
        out.apply_symbol(&e_full);
        let mut mid = k2;
        mid.axpy(1.0, &k3);
        mid.apply_symbol(&e_half);
        out.axpy(h / 3.0, &mid);
        out.axpy(h / 6.0, &k4);
        out.project_symmetries_in_place();
        out.dealias();
        if !out.is_finite() {
            return Err(IntegrationError::NonFinite { time: time + h });
        }
        Ok(out)
    }

    /// `W1` level above which a run started from `u0` counts as blown up.
    pub fn blowup_limit(&self, u0: &StateVector) -> f64 {
        let forcing_scale = self.params.forcing.magnitude() / self.params.nu;
        BLOWUP_FACTOR * u0.norm(Space::W1).max(forcing_scale).max(1.0)
    }

    /// Number of equal steps used to cover `duration`.
    pub fn steps_for(&self, duration: f64) -> usize {
        ((duration / self.config.dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize
    }

    /// Advances `u` by `duration` with `steps_for(duration)` equal steps.
    pub fn advance(&self, u: &StateVector, duration: f64) -> Result<StateVector, IntegrationError> {
        self.advance_from(u, 0.0, duration, self.blowup_limit(u))
    }

    fn advance_from(
        &self,
        u: &StateVector,
        t0: f64,
        duration: f64,
        limit: f64,
    ) -> Result<StateVector, IntegrationError> {
        if duration == 0.0 {
            return Ok(u.clone());
        }
        let n = self.steps_for(duration);
        let h = duration / n as f64;
        let mut state = u.clone();
        for j in 0..n {
            let t = t0 + j as f64 * h;
            state = self.step_at(&state, h, t)?;
            let w1 = state.norm(Space::W1);
            if w1 > limit {
                return Err(IntegrationError::BlowUp {
                    norm: w1,
                    limit,
                    time: t + h,
                });
            }
        }
        Ok(state)
    }

    /// `S_t U0` sampled at `0`, at every requested time, and at `t_final`.
    /// Each interval between consecutive sample times is covered by an
    /// integer number of equal steps no longer than `dt`.
    pub fn evolve(
        &self,
        u0: &StateVector,
        t_final: f64,
        sample_times: &[f64],
    ) -> Result<Trajectory, IntegrationError> {
        if !(t_final.is_finite() && t_final >= 0.0) {
            return Err(IntegrationError::InvalidSamples(format!("final time {t_final}")));
        }
        let mut targets: Vec<f64> = Vec::with_capacity(sample_times.len() + 1);
        for &t in sample_times {
            if !(t.is_finite() && (0.0..=t_final).contains(&t)) {
                return Err(IntegrationError::InvalidSamples(format!(
                    "sample time {t} outside [0, {t_final}]"
                )));
            }
            if t > 0.0 {
                targets.push(t);
            }
        }
        if t_final > 0.0 {
            targets.push(t_final);
        }
        targets.sort_by(f64::total_cmp);
        targets.dedup();

        let limit = self.blowup_limit(u0);
        let mut traj = Trajectory::new(0.0, u0.clone());
        let mut t = 0.0;
        let mut state = u0.clone();
        for target in targets {
            state = self.advance_from(&state, t, target - t, limit)?;
            t = target;
            traj.push(t, state.clone());
        }
        Ok(traj)
    }
}

use super::{AssimilationError, ObservationSchedule};
use crate::functionals::InterpolationOperator;
use crate::integrate::{Integrator, Trajectory};
use crate::spectral::{Space, StateVector};

/// Observation values `l_j(U(t_n))` of a reference solution at every
/// scheduled time. The state-shaped value `r^n = R U(t_n)` is rebuilt on
/// demand from the reconstruction elements.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationStream {
    times: Vec<f64>,
    values: Vec<Vec<f64>>,
}

impl ObservationStream {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `r^n = sum_j l_j(U(t_n)) psi_j`.
    pub fn state(&self, n: usize, op: &InterpolationOperator) -> StateVector {
        op.reconstruct(&self.values[n])
    }
}

/// Records `r^n = R U(t_n)` for every time in the schedule.
pub fn observe(
    reference: &Trajectory,
    op: &InterpolationOperator,
    schedule: &ObservationSchedule,
) -> Result<ObservationStream, AssimilationError> {
    let mut values = Vec::with_capacity(schedule.times().len());
    for &t in schedule.times() {
        let u = reference.at(t).ok_or(AssimilationError::MissingSample(t))?;
        values.push(op.observe(u));
    }
    Ok(ObservationStream {
        times: schedule.times().to_vec(),
        values,
    })
}

/// One step of the prognostic recursion. Returns `u_n` together with the
/// forecast `S_delta u_{n-1}` it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub state: StateVector,
    pub forecast: StateVector,
}

impl StepOutcome {
    /// `u_n - S_delta u_{n-1}`.
    pub fn jump(&self) -> StateVector {
        self.state.sub(&self.forecast)
    }
}

/// `u_n = (I - R) S_delta u_{n-1} + r^n`, followed by the symmetry projection.
pub fn assimilate_step(
    previous: &StateVector,
    observation: &StateVector,
    delta: f64,
    integrator: &Integrator,
    op: &InterpolationOperator,
) -> Result<StepOutcome, AssimilationError> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(AssimilationError::Schedule(format!("step length {delta} must be positive")));
    }
    let forecast = integrator.advance(previous, delta)?;
    let mut state = op.residual(&forecast);
    state.axpy(1.0, observation);
    state.project_symmetries_in_place();
    Ok(StepOutcome { state, forecast })
}

/// The piecewise trajectory `u(t) = S_{t - t_n} u_n` on `[t_n, t_{n+1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrognosticTrajectory {
    times: Vec<f64>,
    states: Vec<StateVector>,
}

impl PrognosticTrajectory {
    pub fn new(times: Vec<f64>, states: Vec<StateVector>) -> Result<Self, AssimilationError> {
        if times.is_empty() || times.len() != states.len() {
            return Err(AssimilationError::Schedule(format!(
                "{} times for {} prognostic values",
                times.len(),
                states.len()
            )));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(AssimilationError::Schedule("prognostic times must increase".into()));
        }
        Ok(Self { times, states })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[StateVector] {
        &self.states
    }

    /// Index `n` of the interval `[t_n, t_{n+1})` holding `t`. The last
    /// time belongs to the final prognostic value.
    fn interval(&self, t: f64) -> Result<usize, AssimilationError> {
        let first = self.times[0];
        let last = *self.times.last().expect("non-empty");
        if !(t >= first && t <= last) {
            return Err(AssimilationError::OutsideRange { time: t, start: first, end: last });
        }
        Ok(self.times.partition_point(|&s| s <= t) - 1)
    }

    /// `u(t)`, equal to `u_n` at `t = t_n`.
    pub fn evaluate(&self, t: f64, integrator: &Integrator) -> Result<StateVector, AssimilationError> {
        let n = self.interval(t)?;
        let dt = t - self.times[n];
        if dt == 0.0 {
            return Ok(self.states[n].clone());
        }
        Ok(integrator.advance(&self.states[n], dt)?)
    }

    /// `u_n - lim_{t -> t_n^-} u(t)` for `n >= 1`.
    pub fn jump(&self, n: usize, integrator: &Integrator) -> Result<StateVector, AssimilationError> {
        if n == 0 || n >= self.times.len() {
            return Err(AssimilationError::Schedule(format!("no jump at index {n}")));
        }
        let delta = self.times[n] - self.times[n - 1];
        let forecast = integrator.advance(&self.states[n - 1], delta)?;
        Ok(self.states[n].sub(&forecast))
    }
}

/// Builds the prognostic trajectory from a sequence of prognostic values.
pub fn prognostic_trajectory(
    times: &[f64],
    states: Vec<StateVector>,
) -> Result<PrognosticTrajectory, AssimilationError> {
    PrognosticTrajectory::new(times.to_vec(), states)
}

/// `||U(t) - u(t)||_space` at each given time, where `U(t)` is evolved from
/// the reference state at the start of the enclosing interval.
pub fn prognosis_error(
    prognosis: &PrognosticTrajectory,
    reference: &Trajectory,
    sample_times: &[f64],
    integrator: &Integrator,
    space: Space,
) -> Result<Vec<f64>, AssimilationError> {
    let mut out = Vec::with_capacity(sample_times.len());
    for &t in sample_times {
        let n = prognosis.interval(t)?;
        let tn = prognosis.times[n];
        let base = reference.at(tn).ok_or(AssimilationError::MissingSample(tn))?;
        let truth = if t == tn { base.clone() } else { integrator.advance(base, t - tn)? };
        out.push(truth.sub(&prognosis.evaluate(t, integrator)?).norm(space));
    }
    Ok(out)
}

//! Discrete data assimilation: observations of a reference solution at
//! times `t_n`, the prognostic recursion `u_n = (I - R) S u_{n-1} + R U(t_n)`,
//! the reliability verdict, squeezing estimates and bounds on the
//! prognostic values.

mod dissipativity;
mod recursion;
mod schedule;
mod squeeze;
mod twin;
mod verdict;

use thiserror::Error;

pub use dissipativity::{verify_dissipativity, DissipativityCheck, DissipativityConstants};
pub use recursion::{
    assimilate_step, observe, prognosis_error, prognostic_trajectory, ObservationStream, PrognosticTrajectory,
    StepOutcome,
};
pub use schedule::ObservationSchedule;
pub use squeeze::{
    edge_pairs, estimate_squeezing, evolved_differences, squeeze_from_differences, squeezing_sweep, sweep_csv, EdgeProbe, SqueezeEstimate,
    SqueezeRow,
};
pub use twin::{
    random_perturbation, run_twin_experiment, AssimilationReport, InitialGuess, ReportRow, Summary, TwinConfig,
    TwinOutcome, RELATIVE_NOISE_FLOOR,
};
pub use verdict::{
    fit_contraction, reliability_verdict, FitWindow, RateFit, Verdict, VerdictConfig, VerdictReport, MIN_TAIL,
};

use crate::functionals::FunctionalsError;
use crate::integrate::IntegrationError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AssimilationError {
    #[error(transparent)]
    Integration(#[from] IntegrationError),
    #[error(transparent)]
    Functionals(#[from] FunctionalsError),
    #[error("invalid schedule: {0}")]
    Schedule(String),
    #[error("the reference trajectory has no sample at t = {0}")]
    MissingSample(f64),
    #[error("t = {time} lies outside the covered range [{start}, {end}]")]
    OutsideRange { time: f64, start: f64, end: f64 },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::verdict::{reliability_verdict, VerdictConfig, VerdictReport};
use super::{assimilate_step, observe, AssimilationError, ObservationSchedule};
use crate::functionals::InterpolationOperator;
use crate::integrate::{spin_up, Integrator, SpinUpConfig, Trajectory};
use crate::spectral::{Space, StateVector};

/// Starting point `u_0` of the prognosis.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialGuess {
    /// `u_0 = U(t_0)`.
    Synchronized,
    /// `u_0 = U(t_0) + delta` with a seeded random `delta` spread over every
    /// shell of the truncation and scaled to `||delta||_W1 = scale`.
    Perturbed { scale: f64, seed: u64 },
    /// `u_0 = 0`.
    Zero,
    /// An explicit state.
    State(StateVector),
}

/// A complete twin experiment.
#[derive(Debug, Clone)]
pub struct TwinConfig {
    pub integrator: Integrator,
    pub operator: InterpolationOperator,
    /// Initial state of the reference run.
    pub reference_start: StateVector,
    /// Spin-up applied to `reference_start`; `None` uses it as given.
    pub spin_up: Option<SpinUpConfig>,
    /// Observation times, measured from the end of the spin-up.
    pub schedule: ObservationSchedule,
    pub initial_guess: InitialGuess,
    pub verdict: VerdictConfig,
    /// Noise floor of the fit relative to `||U(t_0)||_W1`. Overrides
    /// `verdict.noise_floor`.
    pub relative_noise_floor: f64,
    /// Keep the reference trajectory and every `u_n` in the outcome.
    pub keep_states: bool,
}

/// Default relative noise floor for contraction fits.
pub const RELATIVE_NOISE_FLOOR: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportRow {
    pub n: usize,
    pub t: f64,
    pub err_h: f64,
    pub err_w1: f64,
    pub err_w2: f64,
    /// `||u_n - S_delta u_{n-1}||_W1`; zero at `n = 0`.
    pub jump_norm: f64,
    /// `err_W1(n) / err_W1(n - 1)`.
    pub q_local: Option<f64>,
    pub prognosis_h: f64,
    pub prognosis_w2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssimilationReport {
    pub rows: Vec<ReportRow>,
    /// Number of observation functionals.
    pub rank: usize,
    pub spin_up_time: f64,
    /// `max_n ||U(t_n)||_W2` along the reference.
    pub reference_radius: f64,
    pub noise_floor: f64,
    /// `None` when the run is too short for a verdict.
    pub verdict: Option<VerdictReport>,
}

/// One line of the summary CSV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub n_modes: usize,
    pub defect_w1: f64,
    pub c1: f64,
    pub c2: f64,
}

impl AssimilationReport {
    pub fn errors_w1(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.err_w1).collect()
    }

    /// `err_W1` at the last step over `err_W1` at `n = 0`.
    pub fn reduction(&self) -> f64 {
        let first = self.rows[0].err_w1;
        let last = self.rows.last().expect("non-empty").err_w1;
        if first > 0.0 {
            last / first
        } else {
            0.0
        }
    }

    pub fn q_tilde(&self) -> Option<f64> {
        self.verdict.map(|v| v.fit.q_tilde)
    }

    /// CSV with columns `n,t_n,err_H,err_W1,err_W2,jump_norm,q_local`.
    pub fn report_csv(&self) -> String {
        let mut out = String::from("n,t_n,err_H,err_W1,err_W2,jump_norm,q_local\n");
        for r in &self.rows {
            let q = r.q_local.map(|q| format!("{q:.17e}")).unwrap_or_default();
            writeln!(
                out,
                "{},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{q}",
                r.n, r.t, r.err_h, r.err_w1, r.err_w2, r.jump_norm
            )
            .expect("string write");
        }
        out
    }

    /// CSV with columns `N_modes,defect_W1,c1,c2,q_tilde,verdict`.
    pub fn summary_csv(&self, summary: &Summary) -> String {
        let (q, verdict) = match self.verdict {
            Some(v) => (format!("{:.17e}", v.fit.q_tilde), v.verdict.name()),
            None => (String::new(), "undetermined"),
        };
        format!(
            "N_modes,defect_W1,c1,c2,q_tilde,verdict\n{},{:.17e},{:.17e},{:.17e},{q},{verdict}\n",
            summary.n_modes, summary.defect_w1, summary.c1, summary.c2
        )
    }
}

#[derive(Debug, Clone)]
pub struct TwinOutcome {
    pub report: AssimilationReport,
    pub reference: Option<Trajectory>,
    pub prognoses: Option<Vec<StateVector>>,
}

/// Seeded perturbation spread over the whole truncation with `||.||_W1 = scale`.
pub fn random_perturbation(like: &StateVector, scale: f64, seed: u64) -> StateVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut d = StateVector::random(*like.geometry(), &mut rng, f64::INFINITY, 1.0);
    let n = d.norm(Space::W1);
    d.scale(scale / n);
    d
}

/// Spin-up, reference run, observations, prognostic recursion and report.
pub fn run_twin_experiment(config: &TwinConfig) -> Result<TwinOutcome, AssimilationError> {
    let integrator = &config.integrator;
    let op = &config.operator;
    if op.geometry() != integrator.geometry() {
        return Err(AssimilationError::Schedule("operator and integrator grids differ".into()));
    }
    let schedule = &config.schedule;
    if schedule.start() < 0.0 {
        return Err(AssimilationError::Schedule(format!(
            "observation times start at {} before the reference",
            schedule.start()
        )));
    }

    let (start, spin_up_time) = match &config.spin_up {
        Some(sc) => {
            let s = spin_up(integrator, &config.reference_start, sc)?;
            (s.state, s.time)
        }
        None => (config.reference_start.clone(), 0.0),
    };
    let reference = integrator.evolve(&start, schedule.end(), schedule.times())?;
    let stream = observe(&reference, op, schedule)?;
    let truth = |n: usize| reference.at(schedule.times()[n]).expect("observed above");

    let u_ref0 = truth(0);
    let noise_floor = config.relative_noise_floor * u_ref0.norm(Space::W1);
    let mut u = match &config.initial_guess {
        InitialGuess::Synchronized => u_ref0.clone(),
        InitialGuess::Perturbed { scale, seed } => u_ref0.add(&random_perturbation(u_ref0, *scale, *seed)),
        InitialGuess::Zero => StateVector::zeros(*u_ref0.geometry()),
        InitialGuess::State(s) => s.project_symmetries(),
    };

    let mut rows = Vec::with_capacity(schedule.times().len());
    let mut prognoses = config.keep_states.then(Vec::new);
    let mut radius: f64 = 0.0;
    let mut push_row = |n: usize, u: &StateVector, jump: f64, rows: &mut Vec<ReportRow>| {
        let e = truth(n).sub(u);
        let [err_h, err_w1, err_w2] = e.norms();
        let [prognosis_h, _, prognosis_w2] = u.norms();
        radius = radius.max(truth(n).norm(Space::W2));
        let q_local = rows
            .last()
            .and_then(|r: &ReportRow| (r.err_w1 > 0.0).then(|| err_w1 / r.err_w1));
        rows.push(ReportRow {
            n,
            t: schedule.times()[n],
            err_h,
            err_w1,
            err_w2,
            jump_norm: jump,
            q_local,
            prognosis_h,
            prognosis_w2,
        });
    };
    push_row(0, &u, 0.0, &mut rows);
    if let Some(p) = prognoses.as_mut() {
        p.push(u.clone());
    }
    for (i, delta) in schedule.gaps().into_iter().enumerate() {
        let n = i + 1;
        let step = assimilate_step(&u, &stream.state(n, op), delta, integrator, op)?;
        let jump = step.jump().norm(Space::W1);
        u = step.state;
        push_row(n, &u, jump, &mut rows);
        if let Some(p) = prognoses.as_mut() {
            p.push(u.clone());
        }
    }

    let verdict_config = VerdictConfig {
        noise_floor,
        ..config.verdict
    };
    let errors: Vec<f64> = rows.iter().map(|r| r.err_w1).collect();
    let verdict = reliability_verdict(&errors, &verdict_config).ok();
    let report = AssimilationReport {
        rows,
        rank: op.rank(),
        spin_up_time,
        reference_radius: radius,
        noise_floor,
        verdict,
    };
    Ok(TwinOutcome {
        report,
        reference: config.keep_states.then_some(reference),
        prognoses,
    })
}

//! Batch experiment driver behind the `pe-assim` binary.

pub mod config;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

pub use config::{ConfigError, ExperimentConfig, GuessKind, Location, ObservationKind};

use crate::assimilation::{
    random_perturbation, run_twin_experiment, squeezing_sweep, sweep_csv, EdgeProbe, verify_dissipativity, AssimilationError,
    DissipativityConstants, InitialGuess, ObservationSchedule, Summary, TwinConfig, VerdictConfig,
};
use crate::functionals::{
    completeness_defect, estimate_completeness_defect, operator_norm, reconstruction_norm, DefectSource,
    FunctionalsError, InterpolationOperator, ModeSet, MultiplierK, PowerIterationConfig,
};
use crate::integrate::{spin_up, IntegrationError, Integrator, IntegratorConfig, SpinUpConfig};
use crate::model::{ForcingSpec, ModelError, PhysicalParams};
use crate::spectral::checkpoint::{self, CheckpointError};
use crate::spectral::{Domain, Geometry, Grid, Space, StateVector};

/// Environment variable that overrides `output_dir` (but not `--out`).
pub const OUTPUT_ENV: &str = "PE_ASSIM_OUT";

pub const TOOL: &str = env!("CARGO_PKG_NAME");
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Simulate,
    Assimilate,
    Defect,
    Squeeze,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Assimilate => "assimilate",
            Command::Defect => "defect",
            Command::Squeeze => "squeeze",
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error at {0}")]
    Config(#[from] ConfigError),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    /// 2 for configuration problems, 3 for numerical failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<CheckpointError> for CliError {
    fn from(e: CheckpointError) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<IntegrationError> for CliError {
    fn from(e: IntegrationError) -> Self {
        match e {
            IntegrationError::InvalidConfig(m) => CliError::Config(ConfigError::at("integrator", m)),
            IntegrationError::Model(ModelError::InvalidParams(m)) => CliError::Config(ConfigError::at("physics", m)),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl From<FunctionalsError> for CliError {
    fn from(e: FunctionalsError) -> Self {
        match e {
            FunctionalsError::InvalidRequest(m) => CliError::Config(ConfigError::at("observation", m)),
            FunctionalsError::InvalidMultiplier(m) => CliError::Config(ConfigError::at("observation.multiplier", m)),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl From<AssimilationError> for CliError {
    fn from(e: AssimilationError) -> Self {
        match e {
            AssimilationError::Integration(e) => e.into(),
            AssimilationError::Functionals(e) => e.into(),
            AssimilationError::Schedule(m) => CliError::Config(ConfigError::at("schedule", m)),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Config(ConfigError::at("physics", e.to_string()))
    }
}

/// Seeds derived in a fixed order from the run seed. Each keeps 63 bits so
/// the manifest stays a valid TOML document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DerivedSeeds {
    pub reference: u64,
    pub perturbation: u64,
    pub jitter: u64,
    pub pairs: u64,
}

impl DerivedSeeds {
    pub fn new(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut next = || rng.next_u64() >> 1;
        Self {
            reference: next(),
            perturbation: next(),
            jitter: next(),
            pairs: next(),
        }
    }
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'a str,
    version: &'a str,
    command: &'a str,
    seed: u64,
    derived_seeds: DerivedSeeds,
    config: &'a ExperimentConfig,
}

/// Options collected from the command line.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub quiet: bool,
}

/// Reads the configuration file (or the defaults) and applies overrides.
/// `--out` beats the environment variable, which beats the file.
pub fn resolve_config(
    path: Option<&Path>,
    overrides: &Overrides,
    env_out: Option<PathBuf>,
) -> Result<ExperimentConfig, CliError> {
    let mut config = match path {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| ConfigError {
                location: Location::Key(p.display().to_string()),
                message: e.to_string(),
            })?;
            ExperimentConfig::parse(&text)?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = overrides.seed {
        config.seed = seed;
    }
    if let Some(out) = overrides.out.clone().or(env_out) {
        config.output_dir = out;
    }
    Ok(config)
}

/// Everything a subcommand needs besides its own section.
pub struct Setup {
    pub geom: Geometry,
    pub integrator: Integrator,
    pub seeds: DerivedSeeds,
}

impl Setup {
    pub fn new(config: &ExperimentConfig) -> Result<Self, CliError> {
        config.validate()?;
        let [l1, l2, l3] = config.domain.lengths;
        let [n1, n2, n3] = config.grid.n;
        let domain = Domain::new(l1, l2, l3).map_err(|e| ConfigError::at("domain.lengths", e.to_string()))?;
        let grid = Grid::new(n1, n2, n3).map_err(|e| ConfigError::at("grid.n", e.to_string()))?;
        let geom = Geometry::new(domain, grid);
        let p = &config.physics;
        let forcing = ForcingSpec::preset(geom, p.forcing, p.amplitude)?;
        let params = PhysicalParams::new(p.nu, p.f, forcing)?;
        let ic = IntegratorConfig::new(config.integrator.dt, config.integrator.cfl_guard)?;
        Ok(Self {
            geom,
            integrator: Integrator::new(params, ic),
            seeds: DerivedSeeds::new(config.seed),
        })
    }

    /// Seeded random initial state of the reference run.
    pub fn initial_state(&self, config: &ExperimentConfig) -> StateVector {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seeds.reference);
        let s = &config.spin_up;
        StateVector::random(self.geom, &mut rng, s.initial_lambda_max, 1.0).scaled(s.initial_amplitude)
    }
}

pub fn spin_up_config(config: &ExperimentConfig) -> SpinUpConfig {
    let s = &config.spin_up;
    SpinUpConfig {
        window: s.window,
        tol: s.tol,
        max_time: s.max_time,
        rest_floor: s.rest_floor,
    }
}

/// The interpolation operator described by the `observation` section,
/// with the mode set it is built on.
pub fn observation_operator(
    config: &ExperimentConfig,
    geom: Geometry,
) -> Result<(ModeSet, InterpolationOperator), CliError> {
    let o = &config.observation;
    let set = match (o.shells, o.lambda_max) {
        (Some(s), _) => ModeSet::with_shells(geom, s)?,
        (None, Some(l)) => ModeSet::up_to_lambda(geom, l),
        (None, None) => unreachable!("validated"),
    };
    let op = match o.kind {
        ObservationKind::Modes => InterpolationOperator::modal(&set),
        ObservationKind::Generalized => {
            let k = MultiplierK::preset(&geom, o.multiplier)?;
            InterpolationOperator::generalized(&set, &k)?
        }
    };
    Ok((set, op))
}

pub fn schedule(config: &ExperimentConfig, seeds: &DerivedSeeds) -> Result<ObservationSchedule, CliError> {
    let s = &config.schedule;
    let out = if s.alpha == s.beta {
        ObservationSchedule::uniform(0.0, s.alpha, s.steps)
    } else {
        ObservationSchedule::jittered(0.0, s.alpha, s.beta, s.steps, s.jitter_seed.unwrap_or(seeds.jitter))
    };
    Ok(out?)
}

fn power_config(config: &ExperimentConfig, seed: u64) -> PowerIterationConfig {
    PowerIterationConfig {
        max_iterations: config.defect.max_iterations,
        tolerance: config.defect.tolerance,
        seed,
    }
}

/// Prints progress lines unless quiet.
pub struct Log {
    quiet: bool,
}

impl Log {
    pub fn new(quiet: bool) -> Self {
        Self { quiet }
    }

    pub fn line(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }
}

fn write_manifest(dir: &Path, command: Command, config: &ExperimentConfig) -> Result<(), CliError> {
    let manifest = Manifest {
        tool: TOOL,
        version: VERSION,
        command: command.name(),
        seed: config.seed,
        derived_seeds: DerivedSeeds::new(config.seed),
        config,
    };
    let text = toml::to_string(&manifest).map_err(|e| CliError::Io(e.to_string()))?;
    fs::write(dir.join("manifest.toml"), text)?;
    Ok(())
}

/// Runs one subcommand and writes its outputs into `config.output_dir`.
pub fn run(command: Command, config: &ExperimentConfig, log: &Log) -> Result<(), CliError> {
    let setup = Setup::new(config)?;
    if command == Command::Squeeze {
        config.validate_squeeze_times()?;
    }
    let dir = config.output_dir.clone();
    fs::create_dir_all(&dir)?;
    write_manifest(&dir, command, config)?;
    log.line(format!("{TOOL} {VERSION}: {} -> {}", command.name(), dir.display()));
    match command {
        Command::Simulate => simulate(config, &setup, &dir, log),
        Command::Assimilate => assimilate(config, &setup, &dir, log),
        Command::Defect => defect(config, &setup, &dir, log),
        Command::Squeeze => squeeze(config, &setup, &dir, log),
    }
}

fn spun_up_reference(config: &ExperimentConfig, setup: &Setup, log: &Log) -> Result<(StateVector, f64), CliError> {
    let start = setup.initial_state(config);
    if !config.spin_up.enabled {
        return Ok((start, 0.0));
    }
    let s = spin_up(&setup.integrator, &start, &spin_up_config(config))?;
    log.line(format!("spin-up converged at t = {:.3}, ||U||_W2 <= {:.6e}", s.time, s.radius));
    Ok((s.state, s.time))
}

fn simulate(config: &ExperimentConfig, setup: &Setup, dir: &Path, log: &Log) -> Result<(), CliError> {
    let sim = &config.simulate;
    let (start, t0) = match &sim.restart {
        Some(path) => {
            let c = checkpoint::read(path)?;
            if *c.state.geometry() != setup.geom {
                return Err(ConfigError::at("simulate.restart", "checkpoint geometry differs from the configuration").into());
            }
            log.line(format!("restarting from {} at t = {}", path.display(), c.time));
            (c.state, c.time)
        }
        None => spun_up_reference(config, setup, log)?,
    };
    let mut samples = Vec::new();
    let mut k = 1;
    while (k as f64) * sim.sample_interval < sim.t_final * (1.0 - 1e-12) {
        samples.push(k as f64 * sim.sample_interval);
        k += 1;
    }
    let traj = setup.integrator.evolve(&start, sim.t_final, &samples)?;
    let mut csv = String::from("t,norm_H,norm_W1,norm_W2\n");
    for s in traj.samples() {
        let [h, w1, w2] = s.state.norms();
        writeln!(csv, "{:.17e},{h:.17e},{w1:.17e},{w2:.17e}", t0 + s.time).expect("string write");
    }
    fs::write(dir.join("norms.csv"), csv)?;
    if sim.checkpoints {
        let states = dir.join("states");
        fs::create_dir_all(&states)?;
        for (i, s) in traj.samples().iter().enumerate() {
            checkpoint::write(&states.join(format!("state_{i:05}.bin")), &s.state, t0 + s.time)?;
        }
    }
    let last = traj.last();
    checkpoint::write(&dir.join("final.bin"), &last.state, t0 + last.time)?;
    let [h, w1, w2] = last.state.norms();
    log.line(format!("t = {:.3}: ||U||_H = {h:.6e}, ||U||_W1 = {w1:.6e}, ||U||_W2 = {w2:.6e}", t0 + last.time));
    Ok(())
}

fn assimilate(config: &ExperimentConfig, setup: &Setup, dir: &Path, log: &Log) -> Result<(), CliError> {
    let (set, op) = observation_operator(config, setup.geom)?;
    let schedule = schedule(config, &setup.seeds)?;
    let a = &config.assimilation;
    let initial_guess = match a.initial_guess {
        GuessKind::Perturbed => InitialGuess::Perturbed {
            scale: a.initial_error,
            seed: setup.seeds.perturbation,
        },
        GuessKind::Synchronized => InitialGuess::Synchronized,
        GuessKind::Zero => InitialGuess::Zero,
    };
    log.line(format!(
        "observing {} functionals over {} shells, {} steps",
        op.rank(),
        set.shell_count(),
        schedule.steps()
    ));
    let twin = TwinConfig {
        integrator: setup.integrator.clone(),
        operator: op.clone(),
        reference_start: setup.initial_state(config),
        spin_up: config.spin_up.enabled.then(|| spin_up_config(config)),
        schedule,
        initial_guess,
        verdict: VerdictConfig {
            margin: a.margin,
            final_ratio: a.final_ratio,
            ..VerdictConfig::default()
        },
        relative_noise_floor: a.noise_floor,
        keep_states: false,
    };
    let outcome = run_twin_experiment(&twin)?;
    let report = &outcome.report;
    fs::write(dir.join("report.csv"), report.report_csv())?;

    let pc = power_config(config, setup.seeds.pairs);
    let defect_w1 = match config.observation.kind {
        ObservationKind::Modes => completeness_defect(DefectSource::Modes(&set), Space::W1, &pc)?.value,
        ObservationKind::Generalized => estimate_completeness_defect(&op, Space::W1, &pc)?.value,
    };
    let c1 = operator_norm(&op, Space::H, &pc)?.value;
    let c2 = operator_norm(&op, Space::W2, &pc)?.value;
    let summary = Summary {
        n_modes: set.len(),
        defect_w1,
        c1,
        c2,
    };
    fs::write(dir.join("summary.csv"), report.summary_csv(&summary))?;

    let mut prognosis = String::from("n,t_n,norm_H,norm_W2\n");
    for r in &report.rows {
        writeln!(prognosis, "{},{:.17e},{:.17e},{:.17e}", r.n, r.t, r.prognosis_h, r.prognosis_w2).expect("string write");
    }
    fs::write(dir.join("prognosis.csv"), prognosis)?;

    let params = setup.integrator.params();
    let lambda_1 = setup.geom.lambda_table().into_iter().filter(|&l| l > 0.0).fold(f64::INFINITY, f64::min);
    let a0 = params.nu * lambda_1;
    let k_g = params.forcing.field().norm(Space::H);
    let c0 = reconstruction_norm(&op, &pc)?.value;
    let k_norm = match config.observation.kind {
        ObservationKind::Modes => 1.0,
        ObservationKind::Generalized => MultiplierK::preset(&setup.geom, config.observation.multiplier)?.norm(),
    };
    let constants = DissipativityConstants {
        a0,
        a1: 1.0 / (params.nu * lambda_1),
        k_g,
        k: report.reference_radius,
        c0,
        c1,
        c2: Some(c2),
        alpha: config.schedule.alpha,
        smoothing: None,
    };
    let h: Vec<f64> = report.rows.iter().map(|r| r.prognosis_h).collect();
    let w2: Vec<f64> = report.rows.iter().map(|r| r.prognosis_w2).collect();
    let check = verify_dissipativity(&h, &w2, &constants, twin.verdict.discard_fraction);
    let opt = |x: Option<f64>| x.map(|v| format!("{v:.17e}")).unwrap_or_default();
    let flag = |x: Option<bool>| x.map(|v| v.to_string()).unwrap_or_default();
    let mut constants_csv = String::from("name,value\n");
    for (name, value) in [
        ("a0_nominal", format!("{a0:.17e}")),
        ("a1_nominal", format!("{:.17e}", constants.a1)),
        ("K_G", format!("{k_g:.17e}")),
        ("K_reference_W2", format!("{:.17e}", constants.k)),
        ("c0", format!("{c0:.17e}")),
        ("c1", format!("{c1:.17e}")),
        ("c2", format!("{c2:.17e}")),
        ("q_star", format!("{:.17e}", check.q_star)),
        ("dissipativity_hypothesis", check.hypothesis_holds.to_string()),
        ("rho_star", opt(check.rho_star)),
        ("sup_prognosis_H", format!("{:.17e}", check.sup_h)),
        ("sup_prognosis_W2", format!("{:.17e}", check.sup_w2)),
        ("tail_sup_prognosis_H", format!("{:.17e}", check.tail_sup_h)),
        ("within_H_bound", flag(check.within_h_bound)),
        ("norm_K", format!("{k_norm:.17e}")),
        ("alpha_threshold", format!("{:.17e}", (1.0 + k_norm).ln() / a0)),
    ] {
        writeln!(constants_csv, "{name},{value}").expect("string write");
    }
    fs::write(dir.join("constants.csv"), constants_csv)?;

    match report.verdict {
        Some(v) => log.line(format!(
            "q_tilde = {:.6}, final/initial W1 error = {:.3e}: {}",
            v.fit.q_tilde,
            report.reduction(),
            v.verdict.name()
        )),
        None => log.line("run too short for a verdict"),
    }
    Ok(())
}

fn defect(config: &ExperimentConfig, setup: &Setup, dir: &Path, log: &Log) -> Result<(), CliError> {
    let d = &config.defect;
    let pc = power_config(config, setup.seeds.pairs);
    let k = match config.observation.kind {
        ObservationKind::Modes => None,
        ObservationKind::Generalized => Some(MultiplierK::preset(&setup.geom, config.observation.multiplier)?),
    };
    let mut csv = String::from(
        "shells,N_modes,lambda_next,defect_W1_closed,defect_W2_closed,defect_W1_est,defect_W1_residual,norm_H,norm_W1,norm_W2\n",
    );
    let mut largest: Option<ModeSet> = None;
    for &shells in &d.shells {
        let set = ModeSet::with_shells(setup.geom, shells)?;
        let op = match &k {
            None => InterpolationOperator::modal(&set),
            Some(k) => InterpolationOperator::generalized(&set, k)?,
        };
        let closed_w1 = set.closed_form_defect(Space::W1);
        let closed_w2 = set.closed_form_defect(Space::W2);
        let (est, residual) = if d.estimate {
            let e = estimate_completeness_defect(&op, Space::W1, &pc)?;
            (format!("{:.17e}", e.value), format!("{:.3e}", e.residual))
        } else {
            (String::new(), String::new())
        };
        let norms = [Space::H, Space::W1, Space::W2]
            .map(|s| operator_norm(&op, s, &pc).map(|e| e.value))
            .into_iter()
            .collect::<Result<Vec<_>, _>>()?;
        let next = set.next_lambda().map(|l| format!("{l:.17e}")).unwrap_or_default();
        writeln!(
            csv,
            "{shells},{},{next},{closed_w1:.17e},{closed_w2:.17e},{est},{residual},{:.17e},{:.17e},{:.17e}",
            set.len(),
            norms[0],
            norms[1],
            norms[2]
        )
        .expect("string write");
        log.line(format!("{shells} shells, N = {}: closed W1 defect {closed_w1:.6e}, estimate {est}", set.len()));
        if largest.as_ref().is_none_or(|l| l.len() < set.len()) {
            largest = Some(set);
        }
    }
    fs::write(dir.join("defect.csv"), csv)?;
    if let Some(set) = largest {
        fs::write(dir.join("modes.csv"), set.table_csv())?;
    }
    Ok(())
}

/// Pairs `(U* + delta_i, U*)` around a spun-up state.
pub fn squeeze_pairs(center: &StateVector, count: usize, scale: f64, seed: u64) -> Vec<(StateVector, StateVector)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let size = scale * center.norm(Space::W1);
    (0..count)
        .map(|_| {
            let d = random_perturbation(center, size, rng.next_u64());
            (center.add(&d), center.clone())
        })
        .collect()
}

fn squeeze(config: &ExperimentConfig, setup: &Setup, dir: &Path, log: &Log) -> Result<(), CliError> {
    let q = &config.squeeze;
    let (center, _) = spun_up_reference(config, setup, log)?;
    let pairs = squeeze_pairs(&center, q.pairs, q.pair_scale, setup.seeds.pairs);
    let probe = EdgeProbe {
        center: &center,
        count: q.edge_pairs,
        size: q.pair_scale * center.norm(Space::W1),
        seed: setup.seeds.pairs.rotate_left(17),
    };
    let edge = (q.edge_pairs > 0).then_some(&probe);
    let rows = squeezing_sweep(&pairs, &q.shells, &q.times, &setup.integrator, edge)?;
    for r in &rows {
        log.line(format!(
            "shells {:>3} (N = {:>5}), t = {}: q_N = {:.6}",
            r.shells, r.n_modes, r.t, r.estimate.q_max
        ));
    }
    fs::write(dir.join("squeeze.csv"), sweep_csv(&rows))?;
    Ok(())
}

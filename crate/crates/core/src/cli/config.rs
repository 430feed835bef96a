//! Experiment configuration: a TOML document whose every key is optional.
//! Missing keys take the defaults below, unknown keys are rejected.

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::functionals::MultiplierPreset;
use crate::model::ForcingPreset;
use crate::spectral::{Domain, Grid};

/// Where a configuration problem was found: a source position for syntax
/// and type errors, a dotted key for constraint violations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Location {
    Source { line: usize, column: usize },
    Key(String),
    Unknown,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Source { line, column } => write!(f, "line {line}, column {column}"),
            Location::Key(k) => write!(f, "{k}"),
            Location::Unknown => write!(f, "<config>"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{location}: {message}")]
pub struct ConfigError {
    pub location: Location,
    pub message: String,
}

impl ConfigError {
    pub fn at(key: &str, message: impl Into<String>) -> Self {
        Self {
            location: Location::Key(key.to_string()),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DomainConfig {
    pub lengths: [f64; 3],
}

impl Default for DomainConfig {
    fn default() -> Self {
        Self {
            lengths: [std::f64::consts::TAU; 3],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub n: [usize; 3],
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { n: [32; 3] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhysicsConfig {
    pub nu: f64,
    pub f: f64,
    pub forcing: ForcingPreset,
    pub amplitude: f64,
}

impl Default for PhysicsConfig {
    fn default() -> Self {
        Self {
            nu: 0.5,
            f: 1.0,
            forcing: ForcingPreset::Default,
            amplitude: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorSection {
    pub dt: f64,
    pub cfl_guard: f64,
}

impl Default for IntegratorSection {
    fn default() -> Self {
        Self { dt: 0.01, cfl_guard: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpinUpSection {
    pub enabled: bool,
    pub window: f64,
    pub tol: f64,
    pub max_time: f64,
    pub rest_floor: f64,
    /// Scale of the seeded random initial state.
    pub initial_amplitude: f64,
    /// Largest eigenvalue carried by the initial state.
    pub initial_lambda_max: f64,
}

impl Default for SpinUpSection {
    fn default() -> Self {
        Self {
            enabled: true,
            window: 2.0,
            tol: 1e-2,
            max_time: 200.0,
            rest_floor: 1e-8,
            initial_amplitude: 1.0,
            initial_lambda_max: 20.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservationKind {
    /// `R = P_N`, the orthogonal projection onto the first shells.
    Modes,
    /// Functionals `(K e_j, .)` with the reconstruction built from `K`.
    Generalized,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ObservationConfig {
    pub kind: ObservationKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shells: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_max: Option<f64>,
    pub multiplier: MultiplierPreset,
}

impl Default for ObservationConfig {
    fn default() -> Self {
        Self {
            kind: ObservationKind::Modes,
            shells: Some(14),
            lambda_max: None,
            multiplier: MultiplierPreset::Identity,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScheduleConfig {
    pub alpha: f64,
    pub beta: f64,
    pub steps: usize,
    /// Seed of the gap draws when `alpha < beta`; taken from the run seed
    /// when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jitter_seed: Option<u64>,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            beta: 0.1,
            steps: 60,
            jitter_seed: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GuessKind {
    Perturbed,
    Synchronized,
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AssimilationSection {
    pub initial_guess: GuessKind,
    /// `||u_0 - U(t_0)||_W1` of the perturbed guess.
    pub initial_error: f64,
    pub margin: f64,
    pub final_ratio: f64,
    /// Noise floor of the contraction fit relative to `||U(t_0)||_W1`.
    pub noise_floor: f64,
}

impl Default for AssimilationSection {
    fn default() -> Self {
        Self {
            initial_guess: GuessKind::Perturbed,
            initial_error: 1.0,
            margin: 0.05,
            final_ratio: 1e-2,
            noise_floor: crate::assimilation::RELATIVE_NOISE_FLOOR,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateSection {
    pub t_final: f64,
    pub sample_interval: f64,
    /// Write a checkpoint for every sample, not only the final state.
    pub checkpoints: bool,
    /// Continue from a checkpoint instead of a spun-up random state.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub restart: Option<PathBuf>,
}

impl Default for SimulateSection {
    fn default() -> Self {
        Self {
            t_final: 10.0,
            sample_interval: 0.5,
            checkpoints: false,
            restart: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DefectSection {
    pub shells: Vec<usize>,
    /// Run the power-iteration estimator next to the closed form.
    pub estimate: bool,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for DefectSection {
    fn default() -> Self {
        Self {
            shells: vec![1, 2, 3, 4, 5, 6],
            estimate: true,
            tolerance: 1e-8,
            max_iterations: 3000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SqueezeSection {
    pub shells: Vec<usize>,
    /// Evaluation times; the squeeze command requires each to lie in
    /// `[schedule.alpha, schedule.beta]`.
    pub times: Vec<f64>,
    pub pairs: usize,
    /// `||U - U*||_W1` of each pair relative to `||U*||_W1`.
    pub pair_scale: f64,
    /// Extra pairs per shell count whose difference lies in the first
    /// unobserved shell.
    pub edge_pairs: usize,
}

impl Default for SqueezeSection {
    fn default() -> Self {
        Self {
            shells: (1..=16).collect(),
            times: vec![0.1],
            pairs: 4,
            pair_scale: 0.05,
            edge_pairs: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub output_dir: PathBuf,
    pub domain: DomainConfig,
    pub grid: GridConfig,
    pub physics: PhysicsConfig,
    pub integrator: IntegratorSection,
    pub spin_up: SpinUpSection,
    pub observation: ObservationConfig,
    pub schedule: ScheduleConfig,
    pub assimilation: AssimilationSection,
    pub simulate: SimulateSection,
    pub defect: DefectSection,
    pub squeeze: SqueezeSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 20240601,
            output_dir: PathBuf::from("out"),
            domain: DomainConfig::default(),
            grid: GridConfig::default(),
            physics: PhysicsConfig::default(),
            integrator: IntegratorSection::default(),
            spin_up: SpinUpSection::default(),
            observation: ObservationConfig::default(),
            schedule: ScheduleConfig::default(),
            assimilation: AssimilationSection::default(),
            simulate: SimulateSection::default(),
            defect: DefectSection::default(),
            squeeze: SqueezeSection::default(),
        }
    }
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

/// TOML integers are signed 64-bit.
fn seed(key: &str, value: u64) -> Result<(), ConfigError> {
    if value > i64::MAX as u64 {
        return Err(ConfigError::at(key, format!("seeds are limited to {}", i64::MAX)));
    }
    Ok(())
}

fn positive(key: &str, x: f64) -> Result<(), ConfigError> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(ConfigError::at(key, format!("must be a positive number, got {x}")))
    }
}

fn nonnegative(key: &str, x: f64) -> Result<(), ConfigError> {
    if x.is_finite() && x >= 0.0 {
        Ok(())
    } else {
        Err(ConfigError::at(key, format!("must be a nonnegative number, got {x}")))
    }
}

impl ExperimentConfig {
    /// Squeezing is only meaningful at times the schedule can realize.
    pub fn validate_squeeze_times(&self) -> Result<(), ConfigError> {
        let sc = &self.schedule;
        for &t in &self.squeeze.times {
            if !(t >= sc.alpha && t <= sc.beta) {
                return Err(ConfigError::at(
                    "squeeze.times",
                    format!("{t} lies outside [schedule.alpha, schedule.beta] = [{}, {}]", sc.alpha, sc.beta),
                ));
            }
        }
        Ok(())
    }

    /// Parses and validates a TOML document.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let config: Self = toml::from_str(text).map_err(|e| {
            let location = match e.span() {
                Some(span) => {
                    let (line, column) = line_column(text, span.start);
                    Location::Source { line, column }
                }
                None => Location::Unknown,
            };
            ConfigError {
                location,
                message: e.message().to_string(),
            }
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        seed("seed", self.seed)?;
        if let Some(s) = self.schedule.jitter_seed {
            seed("schedule.jitter_seed", s)?;
        }
        if let MultiplierPreset::Random { seed: s, .. } = self.observation.multiplier {
            seed("observation.multiplier.seed", s)?;
        }
        let [l1, l2, l3] = self.domain.lengths;
        Domain::new(l1, l2, l3).map_err(|e| ConfigError::at("domain.lengths", e.to_string()))?;
        let [n1, n2, n3] = self.grid.n;
        Grid::new(n1, n2, n3).map_err(|e| ConfigError::at("grid.n", e.to_string()))?;

        positive("physics.nu", self.physics.nu)?;
        if !self.physics.f.is_finite() {
            return Err(ConfigError::at("physics.f", "must be finite"));
        }
        nonnegative("physics.amplitude", self.physics.amplitude)?;

        positive("integrator.dt", self.integrator.dt)?;
        positive("integrator.cfl_guard", self.integrator.cfl_guard)?;

        let s = &self.spin_up;
        positive("spin_up.window", s.window)?;
        positive("spin_up.tol", s.tol)?;
        positive("spin_up.max_time", s.max_time)?;
        if s.max_time < s.window {
            return Err(ConfigError::at("spin_up.max_time", "must be at least one window"));
        }
        nonnegative("spin_up.rest_floor", s.rest_floor)?;
        nonnegative("spin_up.initial_amplitude", s.initial_amplitude)?;
        positive("spin_up.initial_lambda_max", s.initial_lambda_max)?;

        let o = &self.observation;
        match (o.shells, o.lambda_max) {
            (Some(_), Some(_)) => {
                return Err(ConfigError::at(
                    "observation",
                    "give either shells or lambda_max, not both",
                ))
            }
            (None, None) => return Err(ConfigError::at("observation", "give shells or lambda_max")),
            (None, Some(l)) => nonnegative("observation.lambda_max", l)?,
            (Some(_), None) => {}
        }
        if let MultiplierPreset::Random { min, max, .. } = o.multiplier {
            if !(min.is_finite() && max.is_finite() && min > 0.0 && min <= max) {
                return Err(ConfigError::at(
                    "observation.multiplier",
                    format!("random bounds need 0 < min <= max, got [{min}, {max}]"),
                ));
            }
        }

        let sc = &self.schedule;
        positive("schedule.alpha", sc.alpha)?;
        positive("schedule.beta", sc.beta)?;
        if sc.alpha > sc.beta {
            return Err(ConfigError::at("schedule.beta", "must not be smaller than alpha"));
        }
        if sc.steps == 0 {
            return Err(ConfigError::at("schedule.steps", "must be at least 1"));
        }

        let a = &self.assimilation;
        nonnegative("assimilation.initial_error", a.initial_error)?;
        if !(a.margin >= 0.0 && a.margin < 1.0) {
            return Err(ConfigError::at("assimilation.margin", "must lie in [0, 1)"));
        }
        if !(a.final_ratio > 0.0 && a.final_ratio <= 1.0) {
            return Err(ConfigError::at("assimilation.final_ratio", "must lie in (0, 1]"));
        }
        nonnegative("assimilation.noise_floor", a.noise_floor)?;

        nonnegative("simulate.t_final", self.simulate.t_final)?;
        positive("simulate.sample_interval", self.simulate.sample_interval)?;

        let d = &self.defect;
        if d.shells.is_empty() || d.shells.contains(&0) {
            return Err(ConfigError::at("defect.shells", "needs at least one positive shell count"));
        }
        positive("defect.tolerance", d.tolerance)?;
        if d.max_iterations == 0 {
            return Err(ConfigError::at("defect.max_iterations", "must be at least 1"));
        }

        let q = &self.squeeze;
        if q.shells.is_empty() {
            return Err(ConfigError::at("squeeze.shells", "needs at least one shell count"));
        }
        if q.times.is_empty() {
            return Err(ConfigError::at("squeeze.times", "needs at least one time"));
        }
        if q.times.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
            return Err(ConfigError::at("squeeze.times", "times must be positive and finite"));
        }
        if q.pairs == 0 {
            return Err(ConfigError::at("squeeze.pairs", "must be at least 1"));
        }
        positive("squeeze.pair_scale", q.pair_scale)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        assert_eq!(ExperimentConfig::parse("").unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn serialized_defaults_parse_back() {
        let mut c = ExperimentConfig::default();
        c.observation.multiplier = MultiplierPreset::Random {
            seed: 9,
            min: 0.5,
            max: 2.0,
        };
        c.schedule.jitter_seed = Some(4);
        assert_eq!(ExperimentConfig::parse(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn unknown_key_reports_line_and_column() {
        let text = "seed = 1\n[grid]\nn = [8, 8, 8]\nsize = 3\n";
        let e = ExperimentConfig::parse(text).unwrap_err();
        assert_eq!(e.location, Location::Source { line: 4, column: 1 });
        assert!(e.message.contains("size"), "{}", e.message);
    }

    #[test]
    fn type_error_reports_position() {
        let text = "[physics]\nnu = \"thick\"\n";
        let e = ExperimentConfig::parse(text).unwrap_err();
        assert_eq!(e.location, Location::Source { line: 2, column: 6 });
    }

    #[test]
    fn syntax_error_has_a_location() {
        let e = ExperimentConfig::parse("[grid\nn = 1").unwrap_err();
        assert!(matches!(e.location, Location::Source { line: 1, .. }), "{e}");
    }

    #[test]
    fn constraint_violations_name_the_key() {
        let cases = [
            ("[physics]\nnu = -1.0\n", "physics.nu"),
            ("[grid]\nn = [8, 8, 7]\n", "grid.n"),
            ("[integrator]\ndt = 0.0\n", "integrator.dt"),
            ("[observation]\nlambda_max = 4.0\n", "observation"),
            ("[schedule]\nalpha = 0.3\nbeta = 0.2\n", "schedule"),
            ("[squeeze]\npairs = 0\n", "squeeze.pairs"),
            ("[defect]\nshells = []\n", "defect.shells"),
        ];
        for (text, key) in cases {
            let e = ExperimentConfig::parse(text).unwrap_err();
            match &e.location {
                Location::Key(k) => assert!(k.starts_with(key), "{text}: got {k}"),
                other => panic!("{text}: expected a key location, got {other:?}"),
            }
        }
    }

    #[test]
    fn seeds_must_fit_a_toml_integer() {
        let mut c = ExperimentConfig::default();
        c.seed = u64::MAX;
        assert_eq!(c.validate().unwrap_err().location, Location::Key("seed".into()));
        c.seed = i64::MAX as u64;
        assert!(c.validate().is_ok());
        assert_eq!(ExperimentConfig::parse(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn squeeze_times_must_fit_the_schedule() {
        let c = ExperimentConfig::parse("[squeeze]\ntimes = [0.5]\n").unwrap();
        let e = c.validate_squeeze_times().unwrap_err();
        assert_eq!(e.location, Location::Key("squeeze.times".into()));
        assert!(ExperimentConfig::default().validate_squeeze_times().is_ok());
    }

    #[test]
    fn display_includes_location() {
        let e = ConfigError::at("grid.n", "bad");
        assert_eq!(e.to_string(), "grid.n: bad");
        let e = ConfigError {
            location: Location::Source { line: 3, column: 7 },
            message: "oops".into(),
        };
        assert_eq!(e.to_string(), "line 3, column 7: oops");
    }
}

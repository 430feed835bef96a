use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::spectral::checkpoint::{self, CheckpointError};
use crate::spectral::StateVector;

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub time: f64,
    pub state: StateVector,
}

/// States at strictly increasing times.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    samples: Vec<Sample>,
}

impl Trajectory {
    pub fn new(time: f64, state: StateVector) -> Self {
        Self {
            samples: vec![Sample { time, state }],
        }
    }

    /// Appends a sample; panics if `time` does not increase.
    pub fn push(&mut self, time: f64, state: StateVector) {
        if let Some(last) = self.samples.last() {
            assert!(time > last.time, "trajectory times must increase");
        }
        self.samples.push(Sample { time, state });
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn first(&self) -> &Sample {
        &self.samples[0]
    }

    pub fn last(&self) -> &Sample {
        self.samples.last().expect("never empty")
    }

    /// State at `time`, matched to within `1e-9` relative.
    pub fn at(&self, time: f64) -> Option<&StateVector> {
        let tol = 1e-9 * time.abs().max(1.0);
        self.samples
            .iter()
            .find(|s| (s.time - time).abs() <= tol)
            .map(|s| &s.state)
    }

    pub fn into_states(self) -> Vec<StateVector> {
        self.samples.into_iter().map(|s| s.state).collect()
    }

    /// CSV index with columns `t,norm_H,norm_W1,norm_W2`.
    pub fn norm_csv(&self) -> String {
        let mut out = String::from("t,norm_H,norm_W1,norm_W2\n");
        for s in &self.samples {
            let [h, w1, w2] = s.state.norms();
            writeln!(out, "{:.17e},{:.17e},{:.17e},{:.17e}", s.time, h, w1, w2).expect("string write");
        }
        out
    }

    /// Writes `index.csv` plus one checkpoint `state_NNNNN.bin` per sample.
    pub fn export(&self, dir: &Path) -> Result<(), CheckpointError> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("index.csv"), self.norm_csv())?;
        for (i, s) in self.samples.iter().enumerate() {
            checkpoint::write(&dir.join(format!("state_{i:05}.bin")), &s.state, s.time)?;
        }
        Ok(())
    }
}

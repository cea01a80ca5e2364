//! Experiment configuration: one JSON document, every field optional.

use std::path::{Path, PathBuf};

use qrc_core::memory::{StmcSettings, MAX_DEGREE};
use qrc_core::reservoir::MAX_QUBITS;
use qrc_core::{ShotModel, Topology};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::HarnessError;

/// `points` values of `10^x` for `x` evenly spaced on `[min_exponent, max_exponent]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GammaGrid {
    pub min_exponent: f64,
    pub max_exponent: f64,
    pub points: usize,
}

impl GammaGrid {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![10f64.powf(self.min_exponent)];
        }
        let span = self.max_exponent - self.min_exponent;
        (0..self.points)
            .map(|k| 10f64.powf(self.min_exponent + span * k as f64 / (self.points - 1) as f64))
            .collect()
    }
}

/// Fig.-2-style protocol: rest, random inputs, rest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimetraceConfig {
    pub zero_before: usize,
    pub input_steps: usize,
    pub zero_after: usize,
    pub substeps: usize,
    pub gammas: Vec<f64>,
    pub reservoir: usize,
}

impl Default for TimetraceConfig {
    fn default() -> Self {
        Self { zero_before: 5, input_steps: 10, zero_after: 10, substeps: 20, gammas: vec![0.01, 1.0, 100.0], reservoir: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n_qubits: usize,
    pub topology: Topology,
    pub coupling_strength: f64,
    pub gamma_grid: GammaGrid,
    pub ensemble_size: usize,
    pub multiplexing: usize,
    pub shots: ShotModel,
    pub train_len: usize,
    pub test_len: usize,
    pub degrees: Vec<usize>,
    pub delay_cap: usize,
    pub threshold_repetitions: usize,
    pub s_grid: Vec<f64>,
    pub root_seed: u64,
    pub output_dir: PathBuf,
    pub timetrace: TimetraceConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n_qubits: 3,
            topology: Topology::AllToAll,
            coupling_strength: 0.5,
            gamma_grid: GammaGrid { min_exponent: -3.0, max_exponent: 3.0, points: 25 },
            ensemble_size: 15,
            multiplexing: qrc_core::pipeline::DEFAULT_MULTIPLEXING,
            shots: ShotModel::Finite(1_000_000),
            train_len: 1000,
            test_len: 1000,
            degrees: vec![1, 2, 3],
            delay_cap: qrc_core::memory::DEFAULT_DELAY_CAP,
            threshold_repetitions: qrc_core::memory::DEFAULT_THRESHOLD_REPETITIONS,
            s_grid: qrc_core::absorption::default_signal_grid(),
            root_seed: 0,
            output_dir: PathBuf::from("results"),
            timetrace: TimetraceConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let config: Self = serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Io(path.to_path_buf(), e))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let fail = |msg: String| Err(HarnessError::Config(msg));
        if self.n_qubits == 0 || self.n_qubits > MAX_QUBITS {
            return fail(format!("n_qubits must be in 1..={MAX_QUBITS}"));
        }
        if !(self.coupling_strength > 0.0 && self.coupling_strength.is_finite()) {
            return fail("coupling_strength must be positive".into());
        }
        let g = &self.gamma_grid;
        if g.points == 0 || !g.min_exponent.is_finite() || !g.max_exponent.is_finite() || g.min_exponent > g.max_exponent {
            return fail("gamma_grid needs points >= 1 and finite min_exponent <= max_exponent".into());
        }
        if g.points > 1 && g.min_exponent == g.max_exponent {
            return fail("gamma_grid with several points needs min_exponent < max_exponent".into());
        }
        for (name, value) in [
            ("ensemble_size", self.ensemble_size),
            ("multiplexing", self.multiplexing),
            ("train_len", self.train_len),
            ("test_len", self.test_len),
            ("threshold_repetitions", self.threshold_repetitions),
            ("timetrace.substeps", self.timetrace.substeps),
        ] {
            if value == 0 {
                return fail(format!("{name} must be at least 1"));
            }
        }
        if self.degrees.is_empty() || self.degrees.iter().any(|d| !(1..=MAX_DEGREE).contains(d)) {
            return fail(format!("degrees must be a nonempty subset of 1..={MAX_DEGREE}"));
        }
        if self.s_grid.is_empty() || self.s_grid.iter().any(|s| !(0.0..=1.0).contains(s)) {
            return fail("s_grid must be nonempty with values in [0, 1]".into());
        }
        if self.timetrace.gammas.iter().any(|g| !(*g > 0.0 && g.is_finite())) {
            return fail("timetrace.gammas must be positive".into());
        }
        if self.timetrace.reservoir >= self.ensemble_size {
            return fail("timetrace.reservoir must index the ensemble".into());
        }
        Ok(())
    }

    pub fn stmc_settings(&self) -> StmcSettings {
        StmcSettings {
            multiplexing: self.multiplexing,
            shots: self.shots,
            train_len: self.train_len,
            test_len: self.test_len,
            degrees: self.degrees.clone(),
            delay_cap: self.delay_cap,
            threshold_repetitions: self.threshold_repetitions,
            root_seed: self.root_seed,
        }
    }

    /// SHA-256 of the compact JSON serialization (fields in declaration order).
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}

//! Joint memory/absorption sweep over a seeded reservoir ensemble.

use qrc_core::absorption::resonant_absorptions;
use qrc_core::memory::stmc_cell;
use qrc_core::reservoir::sample_network;
use qrc_core::seed::{derive_seed, Purpose};
use qrc_core::{QubitNetworkSpec, StmcCell};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::stats::{mean, spearman};
use crate::HarnessError;

/// Which halves of the joint protocol to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    Stmc,
    Absorption,
    Full,
}

impl SweepKind {
    fn stmc(self) -> bool {
        matches!(self, SweepKind::Stmc | SweepKind::Full)
    }

    fn absorption(self) -> bool {
        matches!(self, SweepKind::Absorption | SweepKind::Full)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbsorptionCell {
    /// `α(0)` per entry of the signal grid.
    pub alpha0: Vec<f64>,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellError {
    pub kind: String,
    pub reservoir: usize,
    pub gamma_index: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReservoirSeeds {
    pub index: usize,
    pub network: u64,
    pub train_inputs: u64,
    pub test_inputs: u64,
}

/// Grid results indexed `[reservoir][gamma_index]`; `None` marks a failed or skipped cell.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub config: ExperimentConfig,
    pub gammas: Vec<f64>,
    pub seeds: Vec<ReservoirSeeds>,
    pub stmc: Vec<Vec<Option<StmcCell>>>,
    pub absorption: Vec<Vec<Option<AbsorptionCell>>>,
    pub errors: Vec<CellError>,
}

impl SweepResult {
    /// Ensemble mean of the degree-`i` total over reservoirs with a valid cell.
    pub fn mean_capacity(&self, degree: usize) -> Vec<Option<f64>> {
        self.column_means(&self.stmc, |c| c.degree(degree).map(|d| d.total))
    }

    /// Ensemble mean of `ᾱ_γ`.
    pub fn mean_absorption(&self) -> Vec<Option<f64>> {
        self.column_means(&self.absorption, |c| Some(c.mean))
    }

    /// Ensemble mean of `α_{s,γ}(0)` for signal-grid entry `s_index`.
    pub fn mean_alpha0(&self, s_index: usize) -> Vec<Option<f64>> {
        self.column_means(&self.absorption, |c| c.alpha0.get(s_index).copied())
    }

    fn column_means<C>(&self, grid: &[Vec<Option<C>>], pick: impl Fn(&C) -> Option<f64>) -> Vec<Option<f64>> {
        (0..self.gammas.len())
            .map(|g| {
                let values: Vec<f64> = grid.iter().filter_map(|row| row.get(g)?.as_ref().and_then(&pick)).collect();
                (!values.is_empty()).then(|| mean(&values))
            })
            .collect()
    }

    /// Spearman correlation of ensemble-mean degree-`i` capacity against `ᾱ_γ` over the
    /// γ points where both exist.
    pub fn correlate(&self, degree: usize) -> Result<f64, HarnessError> {
        let (a, b): (Vec<f64>, Vec<f64>) = self
            .mean_capacity(degree)
            .into_iter()
            .zip(self.mean_absorption())
            .filter_map(|(c, a)| Some((c?, a?)))
            .unzip();
        spearman(&a, &b)
    }
}

/// The seeded ensemble described by the config; each spec carries `γ = 1` until swept.
pub fn sample_ensemble(config: &ExperimentConfig) -> Result<Vec<QubitNetworkSpec>, HarnessError> {
    (0..config.ensemble_size)
        .map(|r| {
            let seed = derive_seed(config.root_seed, r, Purpose::Network, None);
            sample_network(config.n_qubits, config.coupling_strength, 1.0, config.topology, seed).map_err(HarnessError::from)
        })
        .collect()
}

pub fn reservoir_seeds(config: &ExperimentConfig) -> Vec<ReservoirSeeds> {
    let root = config.root_seed;
    (0..config.ensemble_size)
        .map(|index| ReservoirSeeds {
            index,
            network: derive_seed(root, index, Purpose::Network, None),
            train_inputs: derive_seed(root, index, Purpose::TrainInputs, None),
            test_inputs: derive_seed(root, index, Purpose::TestInputs, None),
        })
        .collect()
}

enum Outcome {
    Stmc(StmcCell),
    Absorption(AbsorptionCell),
}

/// Runs every requested `(reservoir, γ)` cell on the current rayon pool. Cell failures
/// become [`CellError`] records; only an invalid ensemble aborts.
pub fn run_sweep(config: &ExperimentConfig, kind: SweepKind) -> Result<SweepResult, HarnessError> {
    config.validate()?;
    let ensemble = sample_ensemble(config)?;
    let gammas = config.gamma_grid.values();
    let settings = config.stmc_settings();

    let mut jobs = Vec::new();
    for r in 0..ensemble.len() {
        for g in 0..gammas.len() {
            if kind.stmc() {
                jobs.push((r, g, true));
            }
            if kind.absorption() {
                jobs.push((r, g, false));
            }
        }
    }
    let outcomes: Vec<Result<Outcome, String>> = jobs
        .par_iter()
        .map(|&(r, g, is_stmc)| {
            let spec = ensemble[r].with_gamma(gammas[g]);
            if is_stmc {
                stmc_cell(&spec, r, g, &settings).map(Outcome::Stmc).map_err(|e| e.to_string())
            } else {
                resonant_absorptions(&spec, &config.s_grid)
                    .map(|alpha0| Outcome::Absorption(AbsorptionCell { mean: mean(&alpha0), alpha0 }))
                    .map_err(|e| e.to_string())
            }
        })
        .collect();

    let mut stmc: Vec<Vec<Option<StmcCell>>> = vec![vec![None; gammas.len()]; ensemble.len()];
    let mut absorption: Vec<Vec<Option<AbsorptionCell>>> = vec![vec![None; gammas.len()]; ensemble.len()];
    let mut errors = Vec::new();
    for (&(r, g, is_stmc), outcome) in jobs.iter().zip(outcomes) {
        match outcome {
            Ok(Outcome::Stmc(c)) => stmc[r][g] = Some(c),
            Ok(Outcome::Absorption(c)) => absorption[r][g] = Some(c),
            Err(message) => errors.push(CellError {
                kind: if is_stmc { "stmc" } else { "absorption" }.into(),
                reservoir: r,
                gamma_index: g,
                message,
            }),
        }
    }
    if !kind.stmc() {
        stmc.clear();
    }
    if !kind.absorption() {
        absorption.clear();
    }
    Ok(SweepResult { config: config.clone(), gammas, seeds: reservoir_seeds(config), stmc, absorption, errors })
}

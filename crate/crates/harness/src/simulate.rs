//! One reservoir run exported as a table: the training half of a capacity cell.

use qrc_core::memory::cell_runs;

use crate::config::ExperimentConfig;
use crate::sweep::sample_ensemble;
use crate::HarnessError;

/// Columns `step, input, x_{v}_{i}…, bias`; `x_{v}_{i}` is qubit `i` at sub-step `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct StatesTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// State collect matrix of reservoir `reservoir` at `γ = gamma` on its training inputs,
/// with the configured shot model.
pub fn run_simulate(config: &ExperimentConfig, reservoir: usize, gamma: f64) -> Result<StatesTable, HarnessError> {
    config.validate()?;
    if reservoir >= config.ensemble_size {
        return Err(HarnessError::Config(format!("reservoir {reservoir} outside ensemble of {}", config.ensemble_size)));
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(HarnessError::Config("gamma must be positive".into()));
    }
    let spec = sample_ensemble(config)?.swap_remove(reservoir).with_gamma(gamma);
    let runs = cell_runs(&spec, reservoir, 0, &config.stmc_settings())?;
    let x = runs.x_train.data();
    let mut header = vec!["step".to_string(), "input".to_string()];
    for v in 0..config.multiplexing {
        header.extend((0..config.n_qubits).map(|i| format!("x_{v}_{i}")));
    }
    header.push("bias".into());
    let rows = (0..x.nrows())
        .map(|k| {
            let mut row = vec![k as f64, runs.inputs_train.values[k]];
            row.extend(x.row(k).iter());
            row
        })
        .collect();
    Ok(StatesTable { header, rows })
}

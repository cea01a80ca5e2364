//! Single-qubit readout traces under a rest / input / rest protocol.

use qrc_core::reservoir::generate_inputs;
use qrc_core::seed::{derive_seed, Purpose};
use qrc_core::{QubitNetworkSpec, Reservoir};
use serde::{Deserialize, Serialize};

use crate::config::TimetraceConfig;
use crate::HarnessError;

/// One sample of `⟨σ_z^(1)⟩`. `time` is in input cycles, sampled at the end of each sub-step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub gamma: f64,
    pub step: usize,
    pub substep: usize,
    pub time: f64,
    pub input: f64,
    pub sigma_z: f64,
}

/// Rest segment of zeros, `input_steps` random drives, rest again.
pub fn protocol_inputs(protocol: &TimetraceConfig, seed: u64) -> Result<Vec<f64>, HarnessError> {
    let mut inputs = vec![0.0; protocol.zero_before];
    if protocol.input_steps > 0 {
        inputs.extend(generate_inputs::<f64>(protocol.input_steps, seed)?.values);
    }
    inputs.extend(std::iter::repeat_n(0.0, protocol.zero_after));
    Ok(inputs)
}

/// Noise-free trace of qubit 0 for every γ in the protocol, starting from the rest state.
pub fn run_timetrace(
    spec: &QubitNetworkSpec,
    protocol: &TimetraceConfig,
    root_seed: u64,
) -> Result<Vec<TracePoint>, HarnessError> {
    let inputs = protocol_inputs(protocol, derive_seed(root_seed, protocol.reservoir, Purpose::Timetrace, None))?;
    let v = protocol.substeps;
    let mut points = Vec::with_capacity(protocol.gammas.len() * inputs.len() * v);
    for &gamma in &protocol.gammas {
        let reservoir = Reservoir::new(&spec.with_gamma(gamma))?;
        let rest = reservoir.rest_state()?;
        reservoir.evolve(&rest, &inputs, v, |k, sub, values| {
            points.push(TracePoint {
                gamma,
                step: k,
                substep: sub,
                time: k as f64 + (sub + 1) as f64 / v as f64,
                input: inputs[k],
                sigma_z: values[0],
            });
            Ok(())
        })?;
    }
    Ok(points)
}

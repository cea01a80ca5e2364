//! Reservoir definition: random couplings, topologies, input sequences, readout
//! observables and the finite-shot measurement model.

use std::fmt;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::operators::{embed, CMatrix, PauliKind, PauliSite};
use crate::scalar::Real;

pub const MAX_QUBITS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    AllToAll,
    Ring,
}

impl Topology {
    /// Whether sites `i` and `j` may be coupled.
    pub fn connects(self, i: usize, j: usize, n: usize) -> bool {
        if i == j {
            return false;
        }
        match self {
            Topology::AllToAll => true,
            Topology::Ring => {
                let d = i.abs_diff(j);
                d == 1 || d == n - 1
            }
        }
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Topology::AllToAll => "all_to_all",
            Topology::Ring => "ring",
        })
    }
}

/// Static definition of a qubit reservoir.
#[derive(Debug, Clone, PartialEq)]
pub struct QubitNetworkSpec<T: Real> {
    pub n_qubits: usize,
    /// Symmetric, zero-diagonal coupling matrix `J_ij`.
    pub coupling: DMatrix<T>,
    /// Spectral radius of `coupling`.
    pub coupling_strength: T,
    pub gamma: T,
    pub topology: Topology,
    /// Qubit energy `h` of the lab-frame model. It drops out in the rotating frame and is
    /// carried for reference only.
    pub qubit_energy: T,
    pub seed: u64,
}

impl<T: Real> QubitNetworkSpec<T> {
    /// Wraps an explicit coupling matrix, checking symmetry and the zero diagonal.
    pub fn from_coupling(coupling: DMatrix<T>, gamma: T, topology: Topology, seed: u64) -> Result<Self> {
        let n = coupling.nrows();
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::UnsupportedQubitCount(n));
        }
        if !coupling.is_square() {
            return Err(Error::NonSquare { rows: n, cols: coupling.ncols() });
        }
        for i in 0..n {
            if coupling[(i, i)] != T::zero() {
                return Err(Error::InvalidParameter("coupling diagonal must vanish".into()));
            }
            for j in 0..i {
                if coupling[(i, j)] != coupling[(j, i)] {
                    return Err(Error::InvalidParameter("coupling must be symmetric".into()));
                }
            }
        }
        if gamma < T::zero() {
            return Err(Error::InvalidParameter(format!("gamma must be non-negative, got {gamma}")));
        }
        let coupling_strength = spectral_radius(&coupling);
        Ok(Self { n_qubits: n, coupling, coupling_strength, gamma, topology, qubit_energy: T::one(), seed })
    }

    /// Same couplings, different decay rate.
    pub fn with_gamma(&self, gamma: T) -> Self {
        Self { gamma, ..self.clone() }
    }

    pub fn hilbert_dim(&self) -> usize {
        1 << self.n_qubits
    }
}

/// Largest absolute eigenvalue of a symmetric matrix.
pub fn spectral_radius<T: Real>(m: &DMatrix<T>) -> T {
    if m.is_empty() {
        return T::zero();
    }
    m.clone().symmetric_eigen().eigenvalues.iter().fold(T::zero(), |acc, x| acc.max(x.abs()))
}

/// Draws a random network: allowed edges get i.i.d. uniform `[0, 1]` weights and the
/// symmetric matrix is rescaled to spectral radius `coupling_strength`.
pub fn sample_network<T: Real>(
    n_qubits: usize,
    coupling_strength: T,
    gamma: T,
    topology: Topology,
    seed: u64,
) -> Result<QubitNetworkSpec<T>> {
    if !(coupling_strength > T::zero()) {
        return Err(Error::InvalidCouplingStrength(coupling_strength.as_f64()));
    }
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        return Err(Error::UnsupportedQubitCount(n_qubits));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coupling = DMatrix::<T>::zeros(n_qubits, n_qubits);
    for i in 0..n_qubits {
        for j in (i + 1)..n_qubits {
            if topology.connects(i, j, n_qubits) {
                let w = T::lit(rng.random::<f64>());
                coupling[(i, j)] = w;
                coupling[(j, i)] = w;
            }
        }
    }
    let radius = spectral_radius(&coupling);
    if radius > T::zero() {
        coupling *= coupling_strength / radius;
    }
    let mut spec = QubitNetworkSpec::from_coupling(coupling, gamma, topology, seed)?;
    if n_qubits > 1 {
        // Report the requested value rather than the re-measured one.
        spec.coupling_strength = coupling_strength;
    }
    Ok(spec)
}

/// Input drive amplitudes `s_k ∈ [0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct InputSequence<T: Real> {
    pub values: Vec<T>,
    pub seed: u64,
}

impl<T: Real> InputSequence<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !(**v >= T::zero() && **v <= T::one())) {
            return Err(Error::InvalidParameter(format!("input {v} outside [0, 1]")));
        }
        Ok(Self { values, seed: 0 })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// I.i.d. uniform inputs on `[0, 1]`.
pub fn generate_inputs<T: Real>(length: usize, seed: u64) -> Result<InputSequence<T>> {
    if length == 0 {
        return Err(Error::InvalidParameter("input length must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..length).map(|_| T::lit(rng.random::<f64>())).collect();
    Ok(InputSequence { values, seed })
}

/// `σ_z` of every qubit, in site order.
pub fn readout_observables<T: Real>(spec: &QubitNetworkSpec<T>) -> Vec<CMatrix<T>> {
    (0..spec.n_qubits)
        .map(|i| embed(PauliSite::new(PauliKind::Z, i), spec.n_qubits).expect("site in range"))
        .collect()
}

/// Number of projective measurements per recorded expectation value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ShotModel {
    Finite(u64),
    Infinite,
}

impl ShotModel {
    pub fn finite(shots: u64) -> Result<Self> {
        if shots == 0 {
            return Err(Error::InvalidParameter("shot count must be at least 1".into()));
        }
        Ok(ShotModel::Finite(shots))
    }
}

impl fmt::Display for ShotModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ShotModel::Finite(m) => write!(f, "{m}"),
            ShotModel::Infinite => f.write_str("infinite"),
        }
    }
}

impl Serialize for ShotModel {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ShotModel::Finite(m) => serializer.serialize_u64(*m),
            ShotModel::Infinite => serializer.serialize_str("infinite"),
        }
    }
}

impl<'de> Deserialize<'de> for ShotModel {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Count(u64),
            Word(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Count(0) => Err(serde::de::Error::custom("shots must be at least 1")),
            Repr::Count(m) => Ok(ShotModel::Finite(m)),
            Repr::Word(w) if w == "infinite" => Ok(ShotModel::Infinite),
            Repr::Word(w) => Err(serde::de::Error::custom(format!(
                "shots must be a positive integer or \"infinite\", got {w:?}"
            ))),
        }
    }
}

const RANGE_SLACK: f64 = 1e-9;

/// Estimates a `σ_z`-type expectation value from `M` shots: `m ~ Binomial(M, (1 + x)/2)`,
/// returned as `2m/M − 1`. Infinite shots pass the value through.
pub fn measure<T: Real, R: Rng + ?Sized>(true_expectation: T, model: ShotModel, rng: &mut R) -> Result<T> {
    let x = true_expectation.as_f64();
    if !(x.abs() <= 1.0 + RANGE_SLACK) {
        return Err(Error::ExpectationOutOfRange { value: x });
    }
    let x = x.clamp(-1.0, 1.0);
    match model {
        ShotModel::Infinite => Ok(T::lit(x)),
        ShotModel::Finite(shots) => {
            let p = (1.0 + x) / 2.0;
            let dist = Binomial::new(shots, p).map_err(|e| Error::InvalidParameter(e.to_string()))?;
            let m = dist.sample(rng) as f64;
            Ok(T::lit(2.0 * m / shots as f64 - 1.0))
        }
    }
}

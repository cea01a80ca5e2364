//! Short-term memory capacity: Legendre delay tasks, squared-Pearson capacities,
//! noise thresholds and truncated totals.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pipeline::{LeastSquares, Reservoir, StateCollectMatrix, DEFAULT_MULTIPLEXING};
use crate::reservoir::{generate_inputs, InputSequence, QubitNetworkSpec, ShotModel};
use crate::scalar::Real;
use crate::seed::{derive_seed, Purpose};

pub const MAX_DEGREE: usize = 3;
pub const DEFAULT_DELAY_CAP: usize = 50;
pub const DEFAULT_THRESHOLD_REPETITIONS: usize = 500;

fn check_degree(degree: usize) -> Result<()> {
    if (1..=MAX_DEGREE).contains(&degree) {
        Ok(())
    } else {
        Err(Error::DegreeOutOfRange(degree))
    }
}

/// `P̃_i(x) = P_i(2x − 1)`, the Legendre polynomial moved onto `[0, 1]`.
pub fn shifted_legendre<T: Real>(degree: usize, x: T) -> Result<T> {
    check_degree(degree)?;
    let u = T::lit(2.0) * x - T::one();
    Ok(match degree {
        1 => u,
        2 => (T::lit(3.0) * u * u - T::one()) / T::lit(2.0),
        _ => (T::lit(5.0) * u * u * u - T::lit(3.0) * u) / T::lit(2.0),
    })
}

/// Entry `k` is `P̃_i(s_{k−τ})`; entries `k < τ` have no defined target and are `None`.
pub fn legendre_target<T: Real>(inputs: &InputSequence<T>, degree: usize, delay: usize) -> Result<Vec<Option<T>>> {
    check_degree(degree)?;
    (0..inputs.len())
        .map(|k| match k.checked_sub(delay) {
            Some(j) => shifted_legendre(degree, inputs.values[j]).map(Some),
            None => Ok(None),
        })
        .collect()
}

/// Squared Pearson correlation `cov²(y, ŷ) / (σ²(y) σ²(ŷ))`.
///
/// A vector whose spread is at roundoff level relative to its magnitude counts as
/// constant and yields [`Error::ZeroVariance`].
pub fn capacity<T: Real>(prediction: &[T], target: &[T]) -> Result<T> {
    if prediction.len() != target.len() {
        return Err(Error::LengthMismatch { left: prediction.len(), right: target.len() });
    }
    if prediction.len() < 2 {
        return Err(Error::InvalidParameter("capacity needs at least two samples".into()));
    }
    let (sy, cy) = centered(prediction);
    let (st, ct) = centered(target);
    if sy.is_none() || st.is_none() {
        return Err(Error::ZeroVariance);
    }
    let (syy, stt) = (sy.unwrap_or_default(), st.unwrap_or_default());
    let cov = cy.iter().zip(&ct).fold(T::zero(), |acc, (&a, &b)| acc + a * b);
    let c = cov * cov / (syy * stt);
    Ok(c.clamp(T::zero(), T::one()))
}

/// Centered copy and its sum of squares, or `None` for the sum if the vector is constant.
fn centered<T: Real>(v: &[T]) -> (Option<T>, Vec<T>) {
    let n = T::from_count(v.len());
    let mean = v.iter().fold(T::zero(), |a, &b| a + b) / n;
    let scale = v.iter().fold(T::zero(), |a, &b| a.max(b.abs()));
    let c: Vec<T> = v.iter().map(|&x| x - mean).collect();
    let ss = c.iter().fold(T::zero(), |a, &b| a + b * b);
    let floor = T::lit(1e3) * T::unit_roundoff() * scale;
    if (ss / n).sqrt() <= floor || ss == T::zero() {
        (None, c)
    } else {
        (Some(ss), c)
    }
}

/// Capacity with a constant prediction or target mapped to 0.
fn capacity_or_zero<T: Real>(prediction: &[T], target: &[T]) -> Result<T> {
    match capacity(prediction, target) {
        Err(Error::ZeroVariance) => Ok(T::zero()),
        other => other,
    }
}

fn random_target<T: Real, R: Rng + ?Sized>(degree: usize, len: usize, rng: &mut R) -> Result<Vec<T>> {
    (0..len).map(|_| shifted_legendre(degree, T::lit(rng.random::<f64>()))).collect()
}

/// Largest capacity reached against random targets over `repetitions` trials.
///
/// Each trial trains on one i.i.d. `P̃_i(uniform)` sequence and scores the test-set
/// prediction against a second, independent one.
pub fn noise_threshold<T: Real, R: Rng + ?Sized>(
    x_train: &StateCollectMatrix<T>,
    x_test: &StateCollectMatrix<T>,
    degree: usize,
    repetitions: usize,
    rng: &mut R,
) -> Result<T> {
    check_degree(degree)?;
    if repetitions == 0 {
        return Err(Error::InvalidParameter("threshold repetitions must be at least 1".into()));
    }
    if x_train.cols() != x_test.cols() {
        return Err(Error::DimensionMismatch { expected: x_train.cols(), got: x_test.cols() });
    }
    let solver = LeastSquares::new(x_train.data())?;
    let mut best = T::zero();
    for _ in 0..repetitions {
        let train = random_target::<T, _>(degree, x_train.rows(), rng)?;
        let weights = solver.solve(&train)?;
        let prediction: Vec<T> = (x_test.data() * weights).iter().copied().collect();
        let test = random_target::<T, _>(degree, x_test.rows(), rng)?;
        best = best.max(capacity_or_zero(&prediction, &test)?);
    }
    Ok(best)
}

/// Capacity `C_i^τ` at one delay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityRecord<T> {
    pub degree: usize,
    pub delay: usize,
    pub capacity: T,
    pub above_threshold: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TotalCapacity<T> {
    pub total: T,
    /// Number of retained delays, i.e. the cut happens at `τ = tau_max`.
    pub tau_max: usize,
    /// Every delay scanned, including the one that fell below threshold.
    pub records: Vec<CapacityRecord<T>>,
}

/// `C_i^τ` trained on the train split and scored on the test split, rows `k < τ` dropped.
pub fn delay_capacity<T: Real>(
    x_train: &StateCollectMatrix<T>,
    x_test: &StateCollectMatrix<T>,
    inputs_train: &InputSequence<T>,
    inputs_test: &InputSequence<T>,
    degree: usize,
    delay: usize,
) -> Result<T> {
    let fit = |x: &StateCollectMatrix<T>, inputs: &InputSequence<T>| -> Result<(StateCollectMatrix<T>, Vec<T>)> {
        if x.rows() != inputs.len() {
            return Err(Error::LengthMismatch { left: x.rows(), right: inputs.len() });
        }
        let target: Vec<T> = legendre_target(inputs, degree, delay)?.into_iter().flatten().collect();
        Ok((x.tail(delay), target))
    };
    let (xa, ya) = fit(x_train, inputs_train)?;
    let (xb, yb) = fit(x_test, inputs_test)?;
    if ya.len() < 2 || yb.len() < 2 {
        return Ok(T::zero());
    }
    let weights = LeastSquares::new(xa.data())?.solve(&ya)?;
    let prediction: Vec<T> = (xb.data() * weights).iter().copied().collect();
    capacity_or_zero(&prediction, &yb)
}

/// `C_i = Σ_τ C_i^τ`, scanning `τ = 0, 1, …, delay_cap` and stopping at the first
/// capacity below `threshold`.
pub fn total_capacity<T: Real>(
    x_train: &StateCollectMatrix<T>,
    x_test: &StateCollectMatrix<T>,
    inputs_train: &InputSequence<T>,
    inputs_test: &InputSequence<T>,
    degree: usize,
    threshold: T,
    delay_cap: usize,
) -> Result<TotalCapacity<T>> {
    check_degree(degree)?;
    let mut total = T::zero();
    let mut records = Vec::new();
    let mut tau_max = 0;
    for delay in 0..=delay_cap {
        let c = delay_capacity(x_train, x_test, inputs_train, inputs_test, degree, delay)?;
        let above = c >= threshold;
        records.push(CapacityRecord { degree, delay, capacity: c, above_threshold: above });
        if !above {
            break;
        }
        total += c;
        tau_max = delay + 1;
    }
    Ok(TotalCapacity { total, tau_max, records })
}

/// Settings shared by every cell of a capacity sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StmcSettings {
    pub multiplexing: usize,
    pub shots: ShotModel,
    pub train_len: usize,
    pub test_len: usize,
    pub degrees: Vec<usize>,
    pub delay_cap: usize,
    pub threshold_repetitions: usize,
    pub root_seed: u64,
}

impl Default for StmcSettings {
    fn default() -> Self {
        Self {
            multiplexing: DEFAULT_MULTIPLEXING,
            shots: ShotModel::Finite(1_000_000),
            train_len: 1000,
            test_len: 1000,
            degrees: vec![1, 2, 3],
            delay_cap: DEFAULT_DELAY_CAP,
            threshold_repetitions: DEFAULT_THRESHOLD_REPETITIONS,
            root_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeCapacity<T> {
    pub degree: usize,
    pub total: T,
    pub threshold: T,
    pub tau_max: usize,
    pub records: Vec<CapacityRecord<T>>,
}

/// Capacities of one reservoir at one decay rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StmcCell<T> {
    pub gamma: T,
    pub degrees: Vec<DegreeCapacity<T>>,
}

impl<T: Copy> StmcCell<T> {
    pub fn degree(&self, degree: usize) -> Option<&DegreeCapacity<T>> {
        self.degrees.iter().find(|d| d.degree == degree)
    }
}

/// Train and test state collect matrices of one cell, each run from the rest state.
pub struct CellRuns<T: Real> {
    pub inputs_train: InputSequence<T>,
    pub inputs_test: InputSequence<T>,
    pub x_train: StateCollectMatrix<T>,
    pub x_test: StateCollectMatrix<T>,
}

/// Runs one reservoir on its train and test inputs.
///
/// Input sequences depend only on `(root_seed, reservoir_index)` so that the whole γ
/// sweep of a reservoir sees the same inputs; shot noise is seeded per γ point.
pub fn cell_runs<T: Real>(
    spec: &QubitNetworkSpec<T>,
    reservoir_index: usize,
    gamma_index: usize,
    settings: &StmcSettings,
) -> Result<CellRuns<T>> {
    let root = settings.root_seed;
    let inputs_train = generate_inputs(settings.train_len, derive_seed(root, reservoir_index, Purpose::TrainInputs, None))?;
    let inputs_test = generate_inputs(settings.test_len, derive_seed(root, reservoir_index, Purpose::TestInputs, None))?;
    let reservoir = Reservoir::new(spec)?;
    let rest = reservoir.rest_state()?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(root, reservoir_index, Purpose::TrainShots, Some(gamma_index)));
    let x_train = reservoir.run_from(&rest, &inputs_train, settings.multiplexing, settings.shots, &mut rng)?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(root, reservoir_index, Purpose::TestShots, Some(gamma_index)));
    let x_test = reservoir.run_from(&rest, &inputs_test, settings.multiplexing, settings.shots, &mut rng)?;
    Ok(CellRuns { inputs_train, inputs_test, x_train, x_test })
}

/// Thresholds and total capacities for every configured degree at one `(reservoir, γ)`.
pub fn stmc_cell<T: Real>(
    spec: &QubitNetworkSpec<T>,
    reservoir_index: usize,
    gamma_index: usize,
    settings: &StmcSettings,
) -> Result<StmcCell<T>> {
    if !(spec.gamma > T::zero()) {
        return Err(Error::InvalidParameter("capacity cells need gamma > 0".into()));
    }
    for &d in &settings.degrees {
        check_degree(d)?;
    }
    let runs = cell_runs(spec, reservoir_index, gamma_index, settings)?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(
        settings.root_seed,
        reservoir_index,
        Purpose::Threshold,
        Some(gamma_index),
    ));
    let mut degrees = Vec::with_capacity(settings.degrees.len());
    for &degree in &settings.degrees {
        let threshold =
            noise_threshold(&runs.x_train, &runs.x_test, degree, settings.threshold_repetitions, &mut rng)?;
        let t = total_capacity(
            &runs.x_train,
            &runs.x_test,
            &runs.inputs_train,
            &runs.inputs_test,
            degree,
            threshold,
            settings.delay_cap,
        )?;
        degrees.push(DegreeCapacity { degree, total: t.total, threshold, tau_max: t.tau_max, records: t.records });
    }
    Ok(StmcCell { gamma: spec.gamma, degrees })
}

/// Capacity cells of one reservoir over the γ grid. Failed cells keep their error.
#[derive(Debug, Clone)]
pub struct CapacityCurve<T> {
    pub reservoir: usize,
    pub gamma_grid: Vec<T>,
    pub cells: Vec<Result<StmcCell<T>>>,
}

/// Evaluates every `(reservoir, γ)` cell in parallel. `ensemble[r]` supplies the coupling
/// matrix; its own `gamma` is replaced by each grid value.
pub fn stmc_sweep<T: Real>(ensemble: &[QubitNetworkSpec<T>], gamma_grid: &[T], settings: &StmcSettings) -> Vec<CapacityCurve<T>> {
    let cells: Vec<Result<StmcCell<T>>> = (0..ensemble.len() * gamma_grid.len())
        .into_par_iter()
        .map(|idx| {
            let (r, g) = (idx / gamma_grid.len(), idx % gamma_grid.len());
            stmc_cell(&ensemble[r].with_gamma(gamma_grid[g]), r, g, settings)
        })
        .collect();
    let mut cells = cells.into_iter();
    (0..ensemble.len())
        .map(|r| CapacityCurve {
            reservoir: r,
            gamma_grid: gamma_grid.to_vec(),
            cells: cells.by_ref().take(gamma_grid.len()).collect(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_examples() {
        assert_eq!(shifted_legendre(1, 0.5).unwrap(), 0.0);
        assert_eq!(shifted_legendre(1, 1.0).unwrap(), 1.0);
        assert!((shifted_legendre(2, 0.5).unwrap() + 0.5f64).abs() < 1e-15);
        for &x in &[0.0f64, 0.13, 0.71, 1.0] {
            let p2 = 6.0 * x * x - 6.0 * x + 1.0;
            assert!((shifted_legendre(2, x).unwrap() - p2).abs() < 1e-14);
            let p3 = 20.0 * x * x * x - 30.0 * x * x + 12.0 * x - 1.0;
            assert!((shifted_legendre(3, x).unwrap() - p3).abs() < 1e-14);
        }
        assert!(matches!(shifted_legendre(4, 0.2f64), Err(Error::DegreeOutOfRange(4))));
    }

    #[test]
    fn delayed_target_shifts_index() {
        let inputs = InputSequence::new(vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6]).unwrap();
        let t = legendre_target(&inputs, 2, 2).unwrap();
        assert_eq!(t[0], None);
        assert_eq!(t[1], None);
        assert_eq!(t[5], Some(shifted_legendre(2, 0.4).unwrap()));
    }

    #[test]
    fn capacity_examples() {
        let y = [1.0f64, 2.0, 3.0, 4.0];
        assert!((capacity(&y, &y).unwrap() - 1.0).abs() < 1e-15);
        let neg: Vec<f64> = y.iter().map(|v| -v).collect();
        assert!((capacity(&y, &neg).unwrap() - 1.0).abs() < 1e-15);
        // Centered sums: cov 6.5, ss 5 and 8.75, so C = 42.25 / 43.75 = 169/175.
        let c = capacity(&y, &[1.0, 2.0, 3.0, 5.0]).unwrap();
        assert!((c - 169.0 / 175.0).abs() < 1e-14);
        assert_eq!(capacity(&[1.0, 1.0, 1.0], &y[..3]).unwrap_err(), Error::ZeroVariance);
    }
}

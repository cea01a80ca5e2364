//! Reservoir runs, state collect matrices and least-squares readout training.

use nalgebra::{DMatrix, DVector};

use crate::linalg::ThinSvd;
use rand::Rng;

use crate::error::{Error, Result};
use crate::lindblad::{build_liouvillian, steady_state_of_generator, DensityOperator};
use crate::reservoir::{readout_observables, InputSequence, QubitNetworkSpec, ShotModel, measure};
use crate::scalar::Real;
use crate::superop::{HermitianBasis, StepPropagator};

pub const DEFAULT_MULTIPLEXING: usize = 4;

/// Recorded readouts, one row per input step: `N·V` expectation values followed by a bias of 1.
///
/// Column `v·N + i` holds qubit `i` at sub-step `v` (sub-step `V − 1` ends the cycle).
#[derive(Debug, Clone, PartialEq)]
pub struct StateCollectMatrix<T: Real> {
    data: DMatrix<T>,
    n_qubits: usize,
    multiplexing: usize,
}

impl<T: Real> StateCollectMatrix<T> {
    /// Builds a matrix from readout rows, appending the bias column.
    pub fn from_readouts(readouts: &DMatrix<T>, n_qubits: usize, multiplexing: usize) -> Result<Self> {
        if readouts.ncols() != n_qubits * multiplexing {
            return Err(Error::DimensionMismatch { expected: n_qubits * multiplexing, got: readouts.ncols() });
        }
        let rows = readouts.nrows();
        let mut data = DMatrix::from_element(rows, readouts.ncols() + 1, T::one());
        data.columns_mut(0, readouts.ncols()).copy_from(readouts);
        Ok(Self { data, n_qubits, multiplexing })
    }

    pub fn rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn cols(&self) -> usize {
        self.data.ncols()
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn multiplexing(&self) -> usize {
        self.multiplexing
    }

    pub fn data(&self) -> &DMatrix<T> {
        &self.data
    }

    /// Rows `start..`, keeping the bias column.
    pub fn tail(&self, start: usize) -> Self {
        let start = start.min(self.rows());
        Self {
            data: self.data.rows(start, self.rows() - start).into_owned(),
            n_qubits: self.n_qubits,
            multiplexing: self.multiplexing,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReadoutWeights<T: Real> {
    pub weights: DVector<T>,
}

/// A reservoir prepared for repeated runs: the Liouvillian in the real Hermitian basis is
/// affine in the drive, `L(s) = L(0) + s·(L(1) − L(0))`, so both pieces are built once.
#[derive(Debug, Clone)]
pub struct Reservoir<T: Real> {
    spec: QubitNetworkSpec<T>,
    basis: HermitianBasis,
    undriven: DMatrix<T>,
    drive: DMatrix<T>,
    readout: Vec<DVector<T>>,
}

impl<T: Real> Reservoir<T> {
    pub fn new(spec: &QubitNetworkSpec<T>) -> Result<Self> {
        let basis = HermitianBasis::new(spec.hilbert_dim());
        let undriven = basis.superoperator(build_liouvillian(spec, T::zero())?.matrix());
        let full = basis.superoperator(build_liouvillian(spec, T::one())?.matrix());
        let drive = full - &undriven;
        let readout = readout_observables(spec).iter().map(|o| basis.functional(o)).collect();
        Ok(Self { spec: spec.clone(), basis, undriven, drive, readout })
    }

    pub fn spec(&self) -> &QubitNetworkSpec<T> {
        &self.spec
    }

    pub fn basis(&self) -> HermitianBasis {
        self.basis
    }

    /// Real generator at drive amplitude `s`.
    pub fn generator(&self, s: T) -> DMatrix<T> {
        let mut g = self.undriven.clone();
        if s != T::zero() {
            g += &self.drive * s;
        }
        g
    }

    /// The zero-input steady state.
    pub fn rest_state(&self) -> Result<DensityOperator<T>> {
        self.steady_state(T::zero())
    }

    /// Steady state of `L(s)`.
    pub fn steady_state(&self, s: T) -> Result<DensityOperator<T>> {
        steady_state_of_generator(&self.basis, &self.generator(s))
    }

    /// Evolves `initial` through the input sequence, calling `record(step, substep, readouts)`
    /// after each of the `V` sub-steps of every input cycle.
    pub fn evolve<F>(&self, initial: &DensityOperator<T>, inputs: &[T], multiplexing: usize, mut record: F) -> Result<()>
    where
        F: FnMut(usize, usize, &[T]) -> Result<()>,
    {
        if multiplexing == 0 {
            return Err(Error::InvalidParameter("multiplexing must be at least 1".into()));
        }
        if initial.dim() != self.basis.hilbert_dim() {
            return Err(Error::DimensionMismatch { expected: self.basis.hilbert_dim(), got: initial.dim() });
        }
        let dt = T::one() / T::from_count(multiplexing);
        let mut state = self.basis.coords(initial.matrix());
        let mut values = vec![T::zero(); self.readout.len()];
        let mut cached: Option<(T, StepPropagator<T>)> = None;
        for (k, &s) in inputs.iter().enumerate() {
            let reuse = matches!(&cached, Some((prev, _)) if *prev == s);
            if !reuse {
                cached = Some((s, StepPropagator::new(self.generator(s), dt, multiplexing)));
            }
            let step = &cached.as_ref().expect("propagator prepared").1;
            for v in 0..multiplexing {
                state = step.apply(&state);
                for (value, functional) in values.iter_mut().zip(&self.readout) {
                    *value = functional.dot(&state);
                }
                record(k, v, &values)?;
            }
        }
        Ok(())
    }

    /// Runs from an explicit initial state and records every readout through the shot model.
    pub fn run_from<R: Rng + ?Sized>(
        &self,
        initial: &DensityOperator<T>,
        inputs: &InputSequence<T>,
        multiplexing: usize,
        shots: ShotModel,
        rng: &mut R,
    ) -> Result<StateCollectMatrix<T>> {
        let n = self.spec.n_qubits;
        let mut readouts = DMatrix::<T>::zeros(inputs.len(), n * multiplexing);
        self.evolve(initial, &inputs.values, multiplexing, |k, v, values| {
            for (i, &x) in values.iter().enumerate() {
                readouts[(k, v * n + i)] = measure(x, shots, rng)?;
            }
            Ok(())
        })?;
        StateCollectMatrix::from_readouts(&readouts, n, multiplexing)
    }

    /// Runs from the zero-input steady state.
    pub fn run<R: Rng + ?Sized>(
        &self,
        inputs: &InputSequence<T>,
        multiplexing: usize,
        shots: ShotModel,
        rng: &mut R,
    ) -> Result<StateCollectMatrix<T>> {
        let rest = self.rest_state()?;
        self.run_from(&rest, inputs, multiplexing, shots, rng)
    }
}

/// Drives the reservoir with `inputs` from its zero-input steady state, sub-sampling
/// the `σ_z` readouts `V` times per unit input cycle.
pub fn run_reservoir<T: Real, R: Rng + ?Sized>(
    spec: &QubitNetworkSpec<T>,
    inputs: &InputSequence<T>,
    multiplexing: usize,
    shots: ShotModel,
    rng: &mut R,
) -> Result<StateCollectMatrix<T>> {
    if !(spec.gamma > T::zero()) {
        return Err(Error::InvalidParameter("reservoir runs need gamma > 0".into()));
    }
    Reservoir::new(spec)?.run(inputs, multiplexing, shots, rng)
}

/// Minimum-norm least-squares solver for a fixed design matrix, reusable across targets.
pub struct LeastSquares<T: Real> {
    svd: ThinSvd<T>,
    cutoff: T,
    rows: usize,
}

impl<T: Real> LeastSquares<T> {
    pub fn new(design: &DMatrix<T>) -> Result<Self> {
        let svd = T::thin_svd(design).ok_or(Error::SingularSystem)?;
        let largest = svd.singular_values.iter().copied().fold(T::zero(), |a, b| a.max(b));
        Ok(Self { svd, cutoff: T::rank_tolerance() * largest, rows: design.nrows() })
    }

    pub fn solve(&self, target: &[T]) -> Result<DVector<T>> {
        if target.len() != self.rows {
            return Err(Error::LengthMismatch { left: self.rows, right: target.len() });
        }
        let b = DVector::from_column_slice(target);
        let mut coeffs = self.svd.u.tr_mul(&b);
        for (c, &s) in coeffs.iter_mut().zip(self.svd.singular_values.iter()) {
            *c = if s > self.cutoff { *c / s } else { T::zero() };
        }
        Ok(&self.svd.v * coeffs)
    }
}

/// `argmin_w |ŷ − X w|²` with singular values below `1e-10·σ_max` dropped.
pub fn train_readout<T: Real>(x: &StateCollectMatrix<T>, target: &[T]) -> Result<ReadoutWeights<T>> {
    if target.len() != x.rows() {
        return Err(Error::LengthMismatch { left: x.rows(), right: target.len() });
    }
    let weights = LeastSquares::new(x.data())?.solve(target)?;
    Ok(ReadoutWeights { weights })
}

/// `y = X w`.
pub fn predict<T: Real>(x: &StateCollectMatrix<T>, w: &ReadoutWeights<T>) -> Result<Vec<T>> {
    if w.weights.len() != x.cols() {
        return Err(Error::DimensionMismatch { expected: x.cols(), got: w.weights.len() });
    }
    Ok((x.data() * &w.weights).iter().copied().collect())
}

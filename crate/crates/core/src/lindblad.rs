//! Liouvillian construction and exact propagation for the driven, decaying qubit network.
//!
//! The rotating-frame Hamiltonian is
//! `H = Σ_{i<j} J_ij (σ+^(i) σ-^(j) + σ-^(i) σ+^(j)) + s Σ_i σ_y^(i)` and every qubit decays
//! at the same rate `γ` through `σ-`. Density operators are vectorized by stacking
//! columns, so `vec(A ρ B) = (Bᵀ ⊗ A) vec(ρ)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::operators::{embed, identity, is_hermitian, kron, matrix_exponential, CMatrix, CVector, PauliKind, PauliSite};
use crate::reservoir::QubitNetworkSpec;
use crate::scalar::Real;
use crate::superop::HermitianBasis;

/// A density operator on `2^N` levels.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator<T: Real> {
    matrix: CMatrix<T>,
}

impl<T: Real> DensityOperator<T> {
    /// Wraps a matrix after checking Hermiticity and unit trace.
    pub fn new(matrix: CMatrix<T>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NonSquare { rows: matrix.nrows(), cols: matrix.ncols() });
        }
        if !is_hermitian(&matrix, T::check_tolerance()) {
            return Err(Error::InvalidParameter("density operator must be Hermitian".into()));
        }
        let rho = Self { matrix };
        if (rho.trace() - T::one()).abs() > T::check_tolerance() {
            return Err(Error::InvalidParameter("density operator must have unit trace".into()));
        }
        Ok(rho)
    }

    pub(crate) fn from_matrix_unchecked(matrix: CMatrix<T>) -> Self {
        Self { matrix }
    }

    /// All qubits in `|g>`.
    pub fn ground(n_qubits: usize) -> Self {
        let dim = 1 << n_qubits;
        let mut m = CMatrix::<T>::zeros(dim, dim);
        m[(dim - 1, dim - 1)] = Complex::new(T::one(), T::zero());
        Self { matrix: m }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let w = T::one() / T::from_count(dim);
        Self { matrix: identity::<T>(dim) * Complex::new(w, T::zero()) }
    }

    /// `|ψ><ψ|` for a normalized state vector.
    pub fn pure(psi: &CVector<T>) -> Self {
        let norm = psi.norm();
        let psi = psi.unscale(norm);
        Self { matrix: &psi * psi.adjoint() }
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix<T> {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> T {
        self.matrix.trace().re
    }

    /// Replaces the matrix by its Hermitian part `(ρ + ρ†)/2`.
    pub fn hermitize(&mut self) {
        let adj = self.matrix.adjoint();
        self.matrix += adj;
        self.matrix.scale_mut(T::lit(0.5));
    }

    pub fn eigenvalues(&self) -> DVector<T> {
        self.matrix.clone().symmetric_eigen().eigenvalues
    }

    pub fn vectorize(&self) -> CVector<T> {
        vectorize(&self.matrix)
    }
}

/// Column-stacking vectorization.
pub fn vectorize<T: Real>(m: &CMatrix<T>) -> CVector<T> {
    CVector::from_column_slice(m.as_slice())
}

pub fn unvectorize<T: Real>(v: &CVector<T>, dim: usize) -> Result<CMatrix<T>> {
    if v.len() != dim * dim {
        return Err(Error::DimensionMismatch { expected: dim * dim, got: v.len() });
    }
    Ok(CMatrix::from_column_slice(dim, dim, v.as_slice()))
}

/// Dense Liouvillian `L[s, γ]` on vectorized `2^N × 2^N` operators.
#[derive(Debug, Clone, PartialEq)]
pub struct Liouvillian<T: Real> {
    matrix: CMatrix<T>,
    signal: T,
    gamma: T,
    hilbert_dim: usize,
}

impl<T: Real> Liouvillian<T> {
    /// Builds the generator of `ρ̇ = -i[H, ρ] + γ Σ_i (σ-ρσ+ − ½{σ+σ-, ρ})`.
    pub fn from_hamiltonian(hamiltonian: &CMatrix<T>, n_qubits: usize, gamma: T, signal: T) -> Result<Self> {
        let dim = 1usize << n_qubits;
        if hamiltonian.nrows() != dim || hamiltonian.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: hamiltonian.nrows() });
        }
        let id = identity::<T>(dim);
        let minus_i = Complex::new(T::zero(), -T::one());
        let mut matrix = (kron(&id, hamiltonian) - kron(&hamiltonian.transpose(), &id)) * minus_i;

        if gamma != T::zero() {
            let g = Complex::new(gamma, T::zero());
            let half_g = Complex::new(gamma * T::lit(0.5), T::zero());
            for site in 0..n_qubits {
                let lower = embed::<T>(PauliSite::new(PauliKind::Minus, site), n_qubits)?;
                let raise = embed::<T>(PauliSite::new(PauliKind::Plus, site), n_qubits)?;
                let number = &raise * &lower;
                matrix += kron(&raise.transpose(), &lower) * g;
                matrix -= kron(&id, &number) * half_g;
                matrix -= kron(&number.transpose(), &id) * half_g;
            }
        }
        Ok(Self { matrix, signal, gamma, hilbert_dim: dim })
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    pub fn signal(&self) -> T {
        self.signal
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    pub fn hilbert_dim(&self) -> usize {
        self.hilbert_dim
    }

    /// `L·vec(ρ)`, unvectorized.
    pub fn apply(&self, rho: &CMatrix<T>) -> Result<CMatrix<T>> {
        unvectorize(&(&self.matrix * vectorize(rho)), self.hilbert_dim)
    }
}

/// Rotating-frame Hamiltonian with flip-flop couplings and uniform `σ_y` drive `s`.
pub fn build_hamiltonian<T: Real>(spec: &QubitNetworkSpec<T>, s: T) -> Result<CMatrix<T>> {
    let n = spec.n_qubits;
    let dim = 1usize << n;
    let mut h = CMatrix::<T>::zeros(dim, dim);
    let plus: Vec<_> = (0..n).map(|i| embed::<T>(PauliSite::new(PauliKind::Plus, i), n)).collect::<Result<_>>()?;
    let minus: Vec<_> = (0..n).map(|i| embed::<T>(PauliSite::new(PauliKind::Minus, i), n)).collect::<Result<_>>()?;
    for i in 0..n {
        for j in (i + 1)..n {
            let coupling = spec.coupling[(i, j)];
            if coupling != T::zero() {
                let hop = &plus[i] * &minus[j] + &minus[i] * &plus[j];
                h += hop * Complex::new(coupling, T::zero());
            }
        }
    }
    if s != T::zero() {
        for i in 0..n {
            h += embed::<T>(PauliSite::new(PauliKind::Y, i), n)? * Complex::new(s, T::zero());
        }
    }
    Ok(h)
}

pub fn build_liouvillian<T: Real>(spec: &QubitNetworkSpec<T>, s: T) -> Result<Liouvillian<T>> {
    if spec.gamma < T::zero() {
        return Err(Error::InvalidParameter(format!("gamma must be non-negative, got {}", spec.gamma)));
    }
    let h = build_hamiltonian(spec, s)?;
    Liouvillian::from_hamiltonian(&h, spec.n_qubits, spec.gamma, s)
}

/// Unique fixed point of `L`, normalized to unit trace and Hermitized.
///
/// The kernel is extracted from the real representation of `L` on Hermitian operators,
/// which has the same null space dimension as the complex matrix.
pub fn steady_state<T: Real>(liouvillian: &Liouvillian<T>) -> Result<DensityOperator<T>> {
    let basis = HermitianBasis::new(liouvillian.hilbert_dim());
    steady_state_of_generator(&basis, &basis.superoperator(liouvillian.matrix()))
}

/// Steady state from the real generator of `L` in `basis`.
pub fn steady_state_of_generator<T: Real>(basis: &HermitianBasis, real: &DMatrix<T>) -> Result<DensityOperator<T>> {
    let kernel = crate::operators::nullspace_vector(real).map_err(|e| match e {
        Error::DegenerateNullSpace { dimension } => Error::DegenerateSteadyState { dimension },
        other => other,
    })?;
    let mut rho = basis.operator(&kernel);
    let trace = rho.trace().re;
    if trace.abs() <= T::check_tolerance() {
        return Err(Error::InvalidParameter("steady-state kernel vector is traceless".into()));
    }
    rho.unscale_mut(trace);
    let mut rho = DensityOperator::from_matrix_unchecked(rho);
    rho.hermitize();
    Ok(rho)
}

/// `e^{L·dt} ρ`, re-Hermitized.
pub fn propagate<T: Real>(liouvillian: &Liouvillian<T>, rho: &DensityOperator<T>, dt: T) -> Result<DensityOperator<T>> {
    if dt < T::zero() {
        return Err(Error::InvalidParameter(format!("time step must be non-negative, got {dt}")));
    }
    if rho.dim() != liouvillian.hilbert_dim() {
        return Err(Error::DimensionMismatch { expected: liouvillian.hilbert_dim(), got: rho.dim() });
    }
    if dt == T::zero() {
        return Ok(rho.clone());
    }
    let generator = liouvillian.matrix() * Complex::new(dt, T::zero());
    let propagator = matrix_exponential(&generator)?;
    let next = unvectorize(&(propagator * rho.vectorize()), rho.dim())?;
    let mut out = DensityOperator::from_matrix_unchecked(next);
    out.hermitize();
    Ok(out)
}

/// `Re Tr(O ρ)` for a Hermitian observable `O`.
pub fn expectation<T: Real>(rho: &DensityOperator<T>, observable: &CMatrix<T>) -> Result<T> {
    if observable.nrows() != rho.dim() || observable.ncols() != rho.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), got: observable.nrows() });
    }
    if !is_hermitian(observable, T::check_tolerance()) {
        return Err(Error::NonHermitianObservable);
    }
    let value = trace_product(observable, rho.matrix());
    if value.im.abs() > T::check_tolerance() {
        return Err(Error::ComplexExpectation { imaginary: value.im.as_f64() });
    }
    Ok(value.re)
}

/// `Tr(A B)` without forming the product.
pub(crate) fn trace_product<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> Complex<T> {
    let n = a.nrows();
    let mut acc = Complex::new(T::zero(), T::zero());
    for j in 0..n {
        for k in 0..n {
            acc += a[(j, k)] * b[(k, j)];
        }
    }
    acc
}

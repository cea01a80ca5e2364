//! Dense operator algebra: Pauli matrices, tensor products, site embedding,
//! matrix exponentials, null spaces and shifted solves.
//!
//! Basis convention for a single qubit: index 0 is the excited state `|e>`,
//! index 1 the ground state `|g>`, so `σ_z = diag(+1, -1)` and `σ_-|e> = |g>`.
//! In an `n`-qubit register site 0 is the leftmost tensor factor.

use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::SvdScalar;
use crate::scalar::Real;

pub type CMatrix<T> = DMatrix<Complex<T>>;
pub type CVector<T> = DVector<Complex<T>>;

#[inline]
pub(crate) fn c<T: Real>(re: f64, im: f64) -> Complex<T> {
    Complex::new(T::lit(re), T::lit(im))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PauliKind {
    X,
    Y,
    Z,
    Plus,
    Minus,
    Identity,
}

impl PauliKind {
    pub fn matrix<T: Real>(self) -> CMatrix<T> {
        let (a, b, cc, d) = match self {
            PauliKind::X => (c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)),
            PauliKind::Y => (c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)),
            PauliKind::Z => (c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)),
            // σ+ = |e><g|
            PauliKind::Plus => (c(0., 0.), c(1., 0.), c(0., 0.), c(0., 0.)),
            // σ- = |g><e|
            PauliKind::Minus => (c(0., 0.), c(0., 0.), c(1., 0.), c(0., 0.)),
            PauliKind::Identity => (c(1., 0.), c(0., 0.), c(0., 0.), c(1., 0.)),
        };
        DMatrix::from_row_slice(2, 2, &[a, b, cc, d])
    }
}

/// A single-qubit operator acting on one site of a register.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliSite {
    pub kind: PauliKind,
    pub site: usize,
}

impl PauliSite {
    pub fn new(kind: PauliKind, site: usize) -> Self {
        Self { kind, site }
    }
}

pub fn identity<T: Real>(dim: usize) -> CMatrix<T> {
    CMatrix::<T>::identity(dim, dim)
}

/// Kronecker product `a ⊗ b`.
pub fn kron<N: ComplexField>(a: &DMatrix<N>, b: &DMatrix<N>) -> DMatrix<N> {
    a.kronecker(b)
}

/// `I ⊗ … ⊗ op ⊗ … ⊗ I` with `op` at `op.site` of an `n_qubits` register.
pub fn embed<T: Real>(op: PauliSite, n_qubits: usize) -> Result<CMatrix<T>> {
    if op.site >= n_qubits {
        return Err(Error::SiteOutOfRange { site: op.site, n_qubits });
    }
    let left = identity::<T>(1 << op.site);
    let right = identity::<T>(1 << (n_qubits - op.site - 1));
    Ok(kron(&kron(&left, &op.kind.matrix()), &right))
}

pub fn is_hermitian<T: Real>(m: &CMatrix<T>, tol: T) -> bool {
    m.is_square()
        && (0..m.nrows()).all(|i| (0..=i).all(|j| (m[(i, j)] - m[(j, i)].conj()).modulus() <= tol))
}

fn ensure_square<N: ComplexField>(m: &DMatrix<N>) -> Result<()> {
    if m.is_square() {
        Ok(())
    } else {
        Err(Error::NonSquare { rows: m.nrows(), cols: m.ncols() })
    }
}

/// `e^m` by scaling and squaring with a Padé approximant.
pub fn matrix_exponential<N: ComplexField>(m: &DMatrix<N>) -> Result<DMatrix<N>> {
    ensure_square(m)?;
    if m.nrows() == 0 {
        return Ok(m.clone());
    }
    Ok(m.exp())
}

/// Unit-norm basis vector of the one-dimensional numerical kernel of `m`.
///
/// A singular value counts as zero when it is below `T::rank_tolerance()` times the
/// largest one. Works for real and complex matrices alike.
pub fn nullspace_vector<N, T>(m: &DMatrix<N>) -> Result<DVector<N>>
where
    N: SvdScalar + ComplexField<RealField = T>,
    T: Real,
{
    ensure_square(m)?;
    let svd = N::thin_svd(m).ok_or(Error::SingularSystem)?;
    let sigma = &svd.singular_values;
    let largest = sigma.iter().copied().fold(T::zero(), |a, b| if b > a { b } else { a });
    let cutoff = T::rank_tolerance() * largest;

    let null: Vec<usize> = (0..sigma.len()).filter(|&i| sigma[i] <= cutoff).collect();
    match null.len() {
        0 => Err(Error::NoNullSpace),
        1 => {
            let mut v = svd.v.column(null[0]).into_owned();
            let norm = v.norm();
            v.unscale_mut(norm);
            Ok(v)
        }
        dimension => Err(Error::DegenerateNullSpace { dimension }),
    }
}

/// Solves `(shift·I − m)·x = rhs`.
pub fn solve_shifted<N, T>(m: &DMatrix<N>, shift: N, rhs: &DVector<N>) -> Result<DVector<N>>
where
    N: ComplexField<RealField = T>,
    T: Real,
{
    ensure_square(m)?;
    if rhs.len() != m.nrows() {
        return Err(Error::DimensionMismatch { expected: m.nrows(), got: rhs.len() });
    }
    let n = m.nrows();
    let mut a = -m.clone();
    for i in 0..n {
        a[(i, i)] += shift.clone();
    }
    let lu = a.lu();
    let pivots: Vec<T> = (0..n).map(|i| lu.u()[(i, i)].clone().modulus()).collect();
    let largest = pivots.iter().copied().fold(T::zero(), |a, b| if b > a { b } else { a });
    let smallest = pivots.iter().copied().fold(largest, |a, b| if b < a { b } else { a });
    if largest == T::zero() || smallest <= T::from_count(n) * T::default_epsilon() * largest {
        return Err(Error::SingularSystem);
    }
    let x = lu.solve(rhs).ok_or(Error::SingularSystem)?;
    if x.iter().any(|v| !v.clone().modulus().is_finite()) {
        return Err(Error::SingularSystem);
    }
    Ok(x)
}

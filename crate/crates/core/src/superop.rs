//! Real representation of Hermiticity-preserving superoperators, and the propagation
//! kernel used by the reservoir runs.
//!
//! Operators are expanded in the orthonormal Hermitian basis
//! `{E_aa} ∪ {(E_ab + E_ba)/√2} ∪ {i(E_ab − E_ba)/√2}` (a < b). Each basis element
//! occupies the slot of the column-stacked index it is built from: `E_aa` at `(a, a)`,
//! the symmetric combination at `(a, b)` and the antisymmetric one at `(b, a)`.
//! In this basis a Liouvillian is a real matrix and a density operator is a real
//! vector, so propagation runs entirely in real arithmetic.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::operators::{matrix_exponential, CMatrix};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HermitianBasis {
    dim: usize,
}

impl HermitianBasis {
    pub fn new(hilbert_dim: usize) -> Self {
        Self { dim: hilbert_dim }
    }

    pub fn hilbert_dim(&self) -> usize {
        self.dim
    }

    /// Number of real coordinates, `d²`.
    pub fn len(&self) -> usize {
        self.dim * self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.dim == 0
    }

    #[inline]
    fn slot(&self, row: usize, col: usize) -> usize {
        row + self.dim * col
    }

    /// Coordinates `Tr(F_m X)` of an operator given in column-stacked form.
    /// Only the Hermitian part of `X` contributes.
    fn coords_of_vec<T: Real>(&self, x: &[Complex<T>]) -> DVector<T> {
        let d = self.dim;
        let inv_sqrt2 = T::lit(std::f64::consts::FRAC_1_SQRT_2);
        let mut r = DVector::zeros(d * d);
        for a in 0..d {
            r[self.slot(a, a)] = x[self.slot(a, a)].re;
            for b in (a + 1)..d {
                let ab = x[self.slot(a, b)];
                let ba = x[self.slot(b, a)];
                r[self.slot(a, b)] = (ab.re + ba.re) * inv_sqrt2;
                r[self.slot(b, a)] = (ab.im - ba.im) * inv_sqrt2;
            }
        }
        r
    }

    pub fn coords<T: Real>(&self, op: &CMatrix<T>) -> DVector<T> {
        assert_eq!(op.nrows(), self.dim, "operator dimension");
        self.coords_of_vec(op.as_slice())
    }

    /// Inverse of [`coords`](Self::coords): `Σ_m r_m F_m`.
    pub fn operator<T: Real>(&self, r: &DVector<T>) -> CMatrix<T> {
        let d = self.dim;
        assert_eq!(r.len(), d * d, "coordinate length");
        let inv_sqrt2 = T::lit(std::f64::consts::FRAC_1_SQRT_2);
        let mut m = CMatrix::<T>::zeros(d, d);
        for a in 0..d {
            m[(a, a)] = Complex::new(r[self.slot(a, a)], T::zero());
            for b in (a + 1)..d {
                let z = Complex::new(r[self.slot(a, b)] * inv_sqrt2, r[self.slot(b, a)] * inv_sqrt2);
                m[(a, b)] = z;
                m[(b, a)] = z.conj();
            }
        }
        m
    }

    /// Real functional `c` with `c·r = Tr(O ρ)` for a Hermitian observable `O`.
    pub fn functional<T: Real>(&self, observable: &CMatrix<T>) -> DVector<T> {
        // Tr(O F_m) = <F_m, O> because both are Hermitian.
        self.coords(observable)
    }

    /// Matrix of a Hermiticity-preserving superoperator (given on column-stacked
    /// vectors) in this basis. Anti-Hermitian leakage, if any, is discarded.
    pub fn superoperator<T: Real>(&self, l: &CMatrix<T>) -> DMatrix<T> {
        let d = self.dim;
        let n = d * d;
        assert_eq!(l.nrows(), n, "superoperator dimension");
        let inv_sqrt2 = Complex::new(T::lit(std::f64::consts::FRAC_1_SQRT_2), T::zero());
        let i_inv_sqrt2 = Complex::new(T::zero(), T::lit(std::f64::consts::FRAC_1_SQRT_2));
        let mut out = DMatrix::zeros(n, n);
        let mut image = vec![Complex::new(T::zero(), T::zero()); n];
        for a in 0..d {
            for b in a..d {
                if a == b {
                    let m = self.slot(a, a);
                    image.copy_from_slice(l.column(m).as_slice());
                    out.set_column(m, &self.coords_of_vec(&image));
                    continue;
                }
                let col_ab = l.column(self.slot(a, b));
                let col_ba = l.column(self.slot(b, a));
                for (k, z) in image.iter_mut().enumerate() {
                    *z = (col_ab[k] + col_ba[k]) * inv_sqrt2;
                }
                out.set_column(self.slot(a, b), &self.coords_of_vec(&image));
                for (k, z) in image.iter_mut().enumerate() {
                    *z = (col_ab[k] - col_ba[k]) * i_inv_sqrt2;
                }
                out.set_column(self.slot(b, a), &self.coords_of_vec(&image));
            }
        }
        out
    }
}

/// Taylor truncation bounds `θ_m` for unit roundoff 2⁻⁵³ (Al-Mohy & Higham).
const TAYLOR_THETA: [(usize, f64); 35] = [
    (1, 2.29e-16),
    (2, 2.58e-8),
    (3, 1.39e-5),
    (4, 3.40e-4),
    (5, 2.40e-3),
    (6, 9.07e-3),
    (7, 2.38e-2),
    (8, 5.00e-2),
    (9, 8.96e-2),
    (10, 1.44e-1),
    (11, 2.14e-1),
    (12, 3.00e-1),
    (13, 4.00e-1),
    (14, 5.14e-1),
    (15, 6.41e-1),
    (16, 7.81e-1),
    (17, 9.31e-1),
    (18, 1.09),
    (19, 1.26),
    (20, 1.44),
    (21, 1.62),
    (22, 1.82),
    (23, 2.01),
    (24, 2.22),
    (25, 2.43),
    (26, 2.64),
    (27, 2.86),
    (28, 3.08),
    (29, 3.31),
    (30, 3.54),
    (35, 4.7),
    (40, 6.0),
    (45, 7.2),
    (50, 8.5),
    (55, 9.9),
];

/// Relative cost of one dense matrix product, in matrix-vector products per column.
/// Blocked GEMM runs several times faster per flop than GEMV.
const DENSE_PRODUCT_WEIGHT: f64 = 0.3;

fn one_norm<T: Real>(a: &DMatrix<T>, shift: T) -> T {
    let mut best = T::zero();
    for (j, col) in a.column_iter().enumerate() {
        let mut sum = T::zero();
        for (i, &x) in col.iter().enumerate() {
            let v = if i == j { x - shift } else { x };
            sum += v.abs();
        }
        if sum > best {
            best = sum;
        }
    }
    best
}

fn inf_norm<T: Real>(v: &DVector<T>) -> T {
    v.iter().fold(T::zero(), |acc, x| acc.max(x.abs()))
}

/// A prepared propagator `v ↦ e^{A t} v` for a fixed real generator `A` and step `t`.
///
/// Depending on the norm of `A t` and how many times the step will be applied, either the
/// dense exponential is formed once, or the action is evaluated by a shifted, scaled
/// Taylor series (Al-Mohy & Higham 2011). Both are accurate to working precision.
#[derive(Debug, Clone)]
pub enum StepPropagator<T: Real> {
    Dense(DMatrix<T>),
    Taylor {
        generator: DMatrix<T>,
        shift: T,
        t: T,
        degree: usize,
        stages: usize,
    },
}

impl<T: Real> StepPropagator<T> {
    /// Prepares `e^{A t}` for `applications` consecutive uses.
    pub fn new(generator: DMatrix<T>, t: T, applications: usize) -> Self {
        let n = generator.nrows();
        let shift = if n == 0 { T::zero() } else { generator.trace() / T::from_count(n) };
        let norm = (one_norm(&generator, shift) * t.abs()).as_f64();

        let (degree, stages) = taylor_parameters(norm);
        let taylor_cost = (applications * degree * stages) as f64;
        let squarings = if norm > 4.25 { (norm / 4.25).log2().ceil() } else { 0.0 };
        let dense_cost = (8.0 + squarings) * n as f64 * DENSE_PRODUCT_WEIGHT + applications as f64;

        if taylor_cost <= dense_cost {
            StepPropagator::Taylor { generator, shift, t, degree, stages }
        } else {
            let scaled = generator * t;
            StepPropagator::Dense(matrix_exponential(&scaled).expect("square generator"))
        }
    }

    /// Forces the dense route.
    pub fn dense(generator: &DMatrix<T>, t: T) -> Self {
        StepPropagator::Dense(matrix_exponential(&(generator * t)).expect("square generator"))
    }

    /// Forces the Taylor route.
    pub fn taylor(generator: DMatrix<T>, t: T) -> Self {
        let n = generator.nrows();
        let shift = if n == 0 { T::zero() } else { generator.trace() / T::from_count(n) };
        let norm = (one_norm(&generator, shift) * t.abs()).as_f64();
        let (degree, stages) = taylor_parameters(norm);
        StepPropagator::Taylor { generator, shift, t, degree, stages }
    }

    pub fn is_dense(&self) -> bool {
        matches!(self, StepPropagator::Dense(_))
    }

    /// `e^{A t} v`.
    pub fn apply(&self, v: &DVector<T>) -> DVector<T> {
        match self {
            StepPropagator::Dense(p) => p * v,
            StepPropagator::Taylor { generator, shift, t, degree, stages } => {
                taylor_action(generator, *shift, *t, *degree, *stages, v)
            }
        }
    }
}

/// Degree `m` and number of stages `s` minimizing `m·s` subject to `‖A t‖₁ / s ≤ θ_m`.
fn taylor_parameters(norm: f64) -> (usize, usize) {
    if norm == 0.0 {
        return (0, 1);
    }
    TAYLOR_THETA
        .iter()
        .map(|&(m, theta)| (m, (norm / theta).ceil().max(1.0) as usize))
        .min_by_key(|&(m, s)| (m * s, m))
        .expect("non-empty table")
}

fn taylor_action<T: Real>(a: &DMatrix<T>, shift: T, t: T, degree: usize, stages: usize, v: &DVector<T>) -> DVector<T> {
    let stages_t = T::from_count(stages);
    let eta = (t * shift / stages_t).exp();
    let tol = T::unit_roundoff();
    let mut f = v.clone();
    let mut b = v.clone();
    let mut scratch = DVector::zeros(v.len());
    for _ in 0..stages {
        let mut c1 = inf_norm(&b);
        for j in 1..=degree {
            let coef = t / (stages_t * T::from_count(j));
            // scratch = coef·(A − shift·I)·b
            scratch.gemv(coef, a, &b, T::zero());
            scratch.axpy(-coef * shift, &b, T::one());
            std::mem::swap(&mut b, &mut scratch);
            let c2 = inf_norm(&b);
            f += &b;
            if c1 + c2 <= tol * inf_norm(&f) {
                break;
            }
            c1 = c2;
        }
        f *= eta;
        b.copy_from(&f);
    }
    f
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{PauliKind, CVector};

    type C = Complex<f64>;

    fn random_hermitian(d: usize, seed: u64) -> CMatrix<f64> {
        let mut state = seed;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let m = CMatrix::from_fn(d, d, |_, _| C::new(next(), next()));
        &m + m.adjoint()
    }

    #[test]
    fn coordinates_round_trip() {
        let basis = HermitianBasis::new(4);
        let h = random_hermitian(4, 7);
        let r = basis.coords(&h);
        let back = basis.operator(&r);
        assert!((back - &h).iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn coordinates_preserve_inner_product() {
        let basis = HermitianBasis::new(3);
        let a = random_hermitian(3, 1);
        let b = random_hermitian(3, 2);
        let hs = (a.adjoint() * &b).trace().re;
        assert!((basis.coords(&a).dot(&basis.coords(&b)) - hs).abs() < 1e-14);
    }

    #[test]
    fn functional_gives_expectation() {
        let basis = HermitianBasis::new(2);
        let rho = random_hermitian(2, 3);
        let x = PauliKind::X.matrix::<f64>();
        let direct = (&x * &rho).trace().re;
        assert!((basis.functional(&x).dot(&basis.coords(&rho)) - direct).abs() < 1e-15);
    }

    #[test]
    fn superoperator_matches_commutator() {
        // L(ρ) = -i[H, ρ] in column-stacked form.
        let d = 3;
        let h = random_hermitian(d, 11);
        let id = CMatrix::<f64>::identity(d, d);
        let l = (id.kronecker(&h) - h.transpose().kronecker(&id)) * C::new(0.0, -1.0);
        let basis = HermitianBasis::new(d);
        let real = basis.superoperator(&l);
        let rho = random_hermitian(d, 12);
        let direct = (&h * &rho - &rho * &h) * C::new(0.0, -1.0);
        let via_real = basis.operator(&(&real * basis.coords(&rho)));
        assert!((via_real - direct).iter().all(|z| z.norm() < 1e-13));
        let _ = CVector::<f64>::zeros(1);
    }

    #[test]
    fn taylor_and_dense_agree() {
        let n = 12;
        let mut state = 99u64;
        let a = DMatrix::from_fn(n, n, |i, j| {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            let x = ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5;
            if i == j { x - 3.0 } else { x }
        });
        let v = DVector::from_fn(n, |i, _| (i as f64).sin());
        for &t in &[0.01, 0.5, 3.0, 40.0] {
            let dense = StepPropagator::dense(&a, t).apply(&v);
            let taylor = StepPropagator::taylor(a.clone(), t).apply(&v);
            let scale = dense.amax().max(1e-300);
            assert!((&dense - &taylor).amax() / scale < 1e-12, "t = {t}");
        }
    }

    #[test]
    fn parameter_choice() {
        assert_eq!(taylor_parameters(0.0), (0, 1));
        let (m, s) = taylor_parameters(100.0);
        assert!(100.0 / s as f64 <= TAYLOR_THETA.iter().find(|e| e.0 == m).unwrap().1);
    }
}

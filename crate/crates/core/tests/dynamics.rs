//! Lindblad dynamics against independent oracles: a hand-built master equation
//! integrated with an adaptive Dormand–Prince solver, the closed-form single-qubit
//! steady state, and long-run physicality of the propagated state.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use ode_solvers::{Dopri5, System};
use proptest::prelude::*;
use qrc_core::lindblad::{build_hamiltonian, build_liouvillian, propagate, steady_state, DensityOperator};
use qrc_core::operators::matrix_exponential;
use qrc_core::reservoir::{sample_network, Topology};
use qrc_core::superop::{HermitianBasis, StepPropagator};
use qrc_core::{QubitNetworkSpec, Reservoir};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type C = Complex<f64>;
type M = DMatrix<C>;

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

// Basis order (|e>, |g>).
fn sy() -> M {
    M::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)])
}
fn sz() -> M {
    M::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)])
}
fn splus() -> M {
    M::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(0., 0.), c(0., 0.)])
}
fn sminus() -> M {
    splus().adjoint()
}

fn at(op: &M, site: usize, n: usize) -> M {
    let mut out = M::identity(1, 1);
    for k in 0..n {
        let f = if k == site { op.clone() } else { M::identity(2, 2) };
        out = out.kronecker(&f);
    }
    out
}

fn oracle_hamiltonian(spec: &QubitNetworkSpec, s: f64) -> M {
    let n = spec.n_qubits;
    let d = 1 << n;
    let mut h = M::zeros(d, d);
    for i in 0..n {
        for j in (i + 1)..n {
            let hop = at(&splus(), i, n) * at(&sminus(), j, n) + at(&sminus(), i, n) * at(&splus(), j, n);
            h += hop * c(spec.coupling[(i, j)], 0.0);
        }
        h += at(&sy(), i, n) * c(s, 0.0);
    }
    h
}

fn oracle_rhs(h: &M, n: usize, gamma: f64, rho: &M) -> M {
    let mut out = (h * rho - rho * h) * c(0.0, -1.0);
    for i in 0..n {
        let lo = at(&sminus(), i, n);
        let num = lo.adjoint() * &lo;
        out += (&lo * rho * lo.adjoint() - (&num * rho + rho * &num) * c(0.5, 0.0)) * c(gamma, 0.0);
    }
    out
}

struct Master {
    h: M,
    n: usize,
    gamma: f64,
}

impl Master {
    fn unpack(&self, y: &ode_solvers::DVector<f64>) -> M {
        let d = 1 << self.n;
        M::from_fn(d, d, |i, j| c(y[i + d * j], y[d * d + i + d * j]))
    }
}

impl System<f64, ode_solvers::DVector<f64>> for Master {
    fn system(&self, _t: f64, y: &ode_solvers::DVector<f64>, dy: &mut ode_solvers::DVector<f64>) {
        let d = 1 << self.n;
        let r = oracle_rhs(&self.h, self.n, self.gamma, &self.unpack(y));
        for j in 0..d {
            for i in 0..d {
                dy[i + d * j] = r[(i, j)].re;
                dy[d * d + i + d * j] = r[(i, j)].im;
            }
        }
    }
}

fn integrate(spec: &QubitNetworkSpec, s: f64, rho: &M, t: f64, tol: f64) -> M {
    let n = spec.n_qubits;
    let d = 1 << n;
    let mut y = ode_solvers::DVector::zeros(2 * d * d);
    for j in 0..d {
        for i in 0..d {
            y[i + d * j] = rho[(i, j)].re;
            y[d * d + i + d * j] = rho[(i, j)].im;
        }
    }
    let master = Master { h: oracle_hamiltonian(spec, s), n, gamma: spec.gamma };
    // A single output interval spanning [0, t] gives a wrong endpoint; sample densely.
    let mut solver = Dopri5::new(Master { h: master.h.clone(), n, gamma: spec.gamma }, 0.0, t, t / 100.0, y, tol, tol);
    solver.integrate().expect("integration succeeds");
    master.unpack(solver.y_out().last().expect("final state"))
}

fn random_state(d: usize, rng: &mut ChaCha8Rng) -> M {
    let a = M::from_fn(d, d, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    let rho = &a * a.adjoint();
    let tr = rho.trace();
    rho / tr
}

fn max_abs(m: &M) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn single_qubit(gamma: f64) -> QubitNetworkSpec {
    QubitNetworkSpec::from_coupling(DMatrix::zeros(1, 1), gamma, Topology::AllToAll, 0).unwrap()
}

fn sz_closed_form(gamma: f64, s: f64) -> f64 {
    -gamma * gamma / (gamma * gamma + 8.0 * s * s)
}

#[test]
fn hamiltonian_matches_hand_built_operator() {
    for seed in 0..4 {
        for n in 1..=4 {
            let spec = sample_network(n, 0.5, 1.0, Topology::AllToAll, seed).unwrap();
            let h = build_hamiltonian(&spec, 0.37).unwrap();
            assert!(max_abs(&(h - oracle_hamiltonian(&spec, 0.37))) < 1e-14);
        }
    }
}

#[test]
fn closed_form_steady_state_is_the_long_time_limit() {
    // Validates the formula itself by brute-force integration from the ground state.
    for gamma in [0.1, 1.0, 10.0] {
        for s in [0.0, 0.5, 1.0] {
            let spec = single_qubit(gamma);
            let ground = M::from_row_slice(2, 2, &[c(0., 0.), c(0., 0.), c(0., 0.), c(1., 0.)]);
            let rho = integrate(&spec, s, &ground, 60.0 / gamma, 1e-14);
            let z = (sz() * rho).trace().re;
            assert!((z - sz_closed_form(gamma, s)).abs() < 1e-8, "gamma {gamma} s {s}: {z}");
        }
    }
}

#[test]
fn steady_state_matches_closed_form() {
    for gamma in [0.1, 1.0, 10.0] {
        for s in [0.0, 0.5, 1.0] {
            let rho = steady_state(&build_liouvillian(&single_qubit(gamma), s).unwrap()).unwrap();
            let z = (sz() * rho.matrix()).trace().re;
            assert!((z - sz_closed_form(gamma, s)).abs() < 1e-8, "gamma {gamma} s {s}: {z}");
            let reservoir = Reservoir::new(&single_qubit(gamma)).unwrap();
            let z_real = (sz() * reservoir.steady_state(s).unwrap().matrix()).trace().re;
            assert!((z_real - sz_closed_form(gamma, s)).abs() < 1e-8);
        }
    }
}

#[test]
fn exponential_propagation_matches_adaptive_integration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for seed in 0..6 {
        let gamma = 0.1 + 2.9 * rng.random::<f64>();
        let s = rng.random::<f64>();
        let spec = sample_network(2, 0.5, gamma, Topology::AllToAll, seed).unwrap();
        let rho0 = random_state(4, &mut rng);
        let reference = integrate(&spec, s, &rho0, 1.0, 1e-12);

        let l = build_liouvillian(&spec, s).unwrap();
        let complex = propagate(&l, &DensityOperator::new(rho0.clone()).unwrap(), 1.0).unwrap();
        assert!(max_abs(&(complex.matrix() - &reference)) < 1e-8);

        let reservoir = Reservoir::new(&spec).unwrap();
        let basis = reservoir.basis();
        for applications in [1, 10_000] {
            let step = StepPropagator::new(reservoir.generator(s), 1.0, applications);
            let real = basis.operator(&step.apply(&basis.coords(&rho0)));
            assert!(max_abs(&(real - &reference)) < 1e-8);
        }
    }
}

#[test]
fn thousand_steps_stay_physical() {
    let spec = sample_network(3, 0.5, 0.7, Topology::AllToAll, 3).unwrap();
    let levels = [0.0, 0.25, 0.5, 0.75, 1.0];
    let steps: Vec<M> = levels
        .iter()
        .map(|&s| matrix_exponential(&(build_liouvillian(&spec, s).unwrap().matrix() * c(0.25, 0.0))).unwrap())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let d = 8;
    let mut v: DVector<C> = DVector::from_column_slice(random_state(d, &mut rng).as_slice());
    for _ in 0..1000 {
        v = &steps[rng.random_range(0..levels.len())] * v;
        let rho = M::from_column_slice(d, d, v.as_slice());
        assert!((rho.trace() - c(1.0, 0.0)).norm() < 1e-10);
        assert!(max_abs(&(&rho - rho.adjoint())) < 1e-10);
        let herm = (&rho + rho.adjoint()) * c(0.5, 0.0);
        assert!(herm.symmetric_eigenvalues().min() > -1e-10);
    }
}

fn spec_strategy() -> impl Strategy<Value = (QubitNetworkSpec, f64)> {
    (1usize..=3, 0.05f64..2.0, 0.01f64..5.0, 0.0f64..=1.0, any::<u64>(), prop::bool::ANY).prop_map(
        |(n, j0, gamma, s, seed, ring)| {
            let topology = if ring { Topology::Ring } else { Topology::AllToAll };
            (sample_network(n, j0, gamma, topology, seed).unwrap(), s)
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn liouvillian_preserves_trace_and_hermiticity((spec, s) in spec_strategy(), seed in any::<u64>()) {
        let l = build_liouvillian(&spec, s).unwrap();
        let d = spec.hilbert_dim();
        let id = DVector::from_column_slice(M::identity(d, d).as_slice());
        let leak = l.matrix().transpose() * id;
        prop_assert!(leak.iter().all(|z| z.norm() < 1e-12));

        let rho = random_state(d, &mut ChaCha8Rng::seed_from_u64(seed));
        let out = l.apply(&rho).unwrap();
        prop_assert!(max_abs(&(&out - out.adjoint())) < 1e-12);
        prop_assert!(max_abs(&(out - oracle_rhs(&oracle_hamiltonian(&spec, s), spec.n_qubits, spec.gamma, &rho))) < 1e-12);
    }

    #[test]
    fn real_generator_represents_liouvillian((spec, s) in spec_strategy(), seed in any::<u64>()) {
        let reservoir = Reservoir::new(&spec).unwrap();
        let basis: HermitianBasis = reservoir.basis();
        let rho = random_state(spec.hilbert_dim(), &mut ChaCha8Rng::seed_from_u64(seed));
        let via_basis = basis.operator(&(reservoir.generator(s) * basis.coords(&rho)));
        let direct = build_liouvillian(&spec, s).unwrap().apply(&rho).unwrap();
        prop_assert!(max_abs(&(via_basis - direct)) < 1e-12);
    }

    #[test]
    fn steady_state_is_a_fixed_point((spec, s) in spec_strategy()) {
        let l = build_liouvillian(&spec, s).unwrap();
        let rho = steady_state(&l).unwrap();
        prop_assert!((rho.trace() - 1.0).abs() < 1e-12);
        prop_assert!(max_abs(&l.apply(rho.matrix()).unwrap()) < 1e-10);
        prop_assert!(rho.eigenvalues().min() > -1e-10);
    }
    #[test]
    fn liouvillian_spectrum_is_stable_with_one_zero_mode((spec, s) in spec_strategy()) {
        let l = build_liouvillian(&spec, s).unwrap();
        let eigen = l.matrix().clone().schur().eigenvalues().expect("complex Schur form is triangular");
        prop_assert!(eigen.iter().all(|z| z.re <= 1e-10));
        prop_assert_eq!(eigen.iter().filter(|z| z.norm() < 1e-10).count(), 1);
    }

    #[test]
    fn propagation_is_a_semigroup((spec, s) in spec_strategy(), a in 0.0f64..3.0, b in 0.0f64..3.0, seed in any::<u64>()) {
        let l = build_liouvillian(&spec, s).unwrap();
        let rho = DensityOperator::new(random_state(spec.hilbert_dim(), &mut ChaCha8Rng::seed_from_u64(seed))).unwrap();
        let joint = propagate(&l, &rho, a + b).unwrap();
        let split = propagate(&l, &propagate(&l, &rho, a).unwrap(), b).unwrap();
        prop_assert!(max_abs(&(joint.matrix() - split.matrix())) < 1e-9);
    }

    #[test]
    fn steady_state_survives_propagation((spec, s) in spec_strategy()) {
        let l = build_liouvillian(&spec, s).unwrap();
        let rho = steady_state(&l).unwrap();
        for t in [1.0, 10.0] {
            prop_assert!(max_abs(&(propagate(&l, &rho, t).unwrap().matrix() - rho.matrix())) < 1e-9);
        }
    }
}

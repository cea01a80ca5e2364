//! Reservoir sampling, readout training and memory-capacity properties.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use proptest::prelude::*;
use qrc_core::lindblad::DensityOperator;
use qrc_core::memory::{capacity, cell_runs, delay_capacity, noise_threshold, total_capacity, StmcSettings};
use qrc_core::pipeline::{predict, train_readout, LeastSquares, Reservoir, StateCollectMatrix};
use qrc_core::reservoir::{generate_inputs, measure, sample_network, spectral_radius, ShotModel, Topology};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_design(rows: usize, features: usize, seed: u64) -> StateCollectMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let readouts = DMatrix::from_fn(rows, features, |_, _| rng.random::<f64>() * 2.0 - 1.0);
    StateCollectMatrix::from_readouts(&readouts, features, 1).unwrap()
}

fn random_vec(len: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| rng.random::<f64>()).collect()
}

fn sum_sq(v: impl Iterator<Item = f64>) -> f64 {
    v.map(|x| x * x).sum()
}

fn infinite_settings() -> StmcSettings {
    StmcSettings { shots: ShotModel::Infinite, ..StmcSettings::default() }
}

#[test]
fn fading_memory_forgets_the_initial_state() {
    let spec = sample_network(3, 0.5, 1.0, Topology::AllToAll, 4).unwrap();
    let reservoir = Reservoir::new(&spec).unwrap();
    let inputs = generate_inputs(60, 9).unwrap();
    let mixed = DensityOperator::new(DMatrix::<Complex<f64>>::identity(8, 8) / Complex::new(8.0, 0.0)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let a = reservoir.run(&inputs, 4, ShotModel::Infinite, &mut rng).unwrap();
    let b = reservoir.run_from(&mixed, &inputs, 4, ShotModel::Infinite, &mut rng).unwrap();
    let first = (a.data().row(0) - b.data().row(0)).amax();
    let late = (a.data().rows(50, 10) - b.data().rows(50, 10)).amax();
    assert!(first > 1e-3, "initial states should be distinguishable: {first}");
    assert!(late <= 1e-6, "difference after 50 cycles: {late}");
}

#[test]
fn runs_are_bit_reproducible() {
    let spec = sample_network(3, 0.5, 0.3, Topology::Ring, 2).unwrap();
    let reservoir = Reservoir::new(&spec).unwrap();
    let inputs = generate_inputs(200, 1).unwrap();
    let run = |seed| reservoir.run(&inputs, 4, ShotModel::Finite(1000), &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
    assert_eq!(run(7), run(7));
    assert_ne!(run(7), run(8));
    let x = run(7);
    assert_eq!((x.rows(), x.cols()), (200, 13));
    assert!(x.data().column(12).iter().all(|&v| v == 1.0));
    assert!(x.data().columns(0, 12).iter().all(|v: &f64| v.abs() <= 1.0));
}

#[test]
fn more_multiplexing_never_lowers_training_fit() {
    // dt = 1/V sub-steps nest for V = 1, 2, 4, 8, so each feature set contains the previous.
    let spec = sample_network(3, 0.5, 0.8, Topology::AllToAll, 6).unwrap();
    let reservoir = Reservoir::new(&spec).unwrap();
    let inputs = generate_inputs(300, 3).unwrap();
    let targets = [
        inputs.values.clone(),
        random_vec(300, 11),
        inputs.values.iter().skip(2).chain([0.5, 0.5].iter()).copied().collect::<Vec<_>>(),
    ];
    for target in &targets {
        let mut previous = 0.0;
        for v in [1, 2, 4, 8] {
            let x = reservoir.run(&inputs, v, ShotModel::Infinite, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
            let w = train_readout(&x, target).unwrap();
            let c = capacity(&predict(&x, &w).unwrap(), target).unwrap();
            assert!(c >= previous - 1e-12, "V = {v}: {c} < {previous}");
            previous = c;
        }
    }
}

#[test]
fn least_squares_satisfies_normal_equations() {
    for seed in 0..10 {
        let x = random_design(100, 4, seed);
        let y = random_vec(100, seed + 100);
        let w = train_readout(&x, &y).unwrap();
        let residual = x.data() * &w.weights - DVector::from_column_slice(&y);
        let normal = x.data().tr_mul(&residual);
        assert!(normal.amax() <= 1e-8, "seed {seed}: {}", normal.amax());
    }
}

#[test]
fn no_perturbation_beats_the_least_squares_weights() {
    let x = random_design(200, 12, 5);
    let y = random_vec(200, 6);
    let w = train_readout(&x, &y).unwrap();
    let loss = |w: &DVector<f64>| sum_sq((x.data() * w - DVector::from_column_slice(&y)).iter().copied());
    let best = loss(&w.weights);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for k in 0..1000 {
        let scale = 10f64.powi(-(k % 6) as i32);
        let delta = DVector::from_fn(w.weights.len(), |_, _| (rng.random::<f64>() - 0.5) * scale);
        assert!(loss(&(&w.weights + delta)) >= best);
    }
}

#[test]
fn anchor_current_input_is_strongly_imprinted() {
    let spec = sample_network(3, 0.5, 1.0, Topology::AllToAll, 0).unwrap();
    let runs = cell_runs(&spec, 0, 0, &infinite_settings()).unwrap();
    let c = delay_capacity(&runs.x_train, &runs.x_test, &runs.inputs_train, &runs.inputs_test, 1, 0).unwrap();
    assert!(c > 0.9, "{c}");
}

#[test]
fn threshold_grows_with_repetitions_and_degenerate_cut() {
    let spec = sample_network(3, 0.5, 1.0, Topology::AllToAll, 1).unwrap();
    let settings = StmcSettings { train_len: 300, test_len: 300, ..infinite_settings() };
    let runs = cell_runs(&spec, 1, 0, &settings).unwrap();
    let mut previous = 0.0;
    for reps in [1, 5, 20, 100] {
        let t = noise_threshold(&runs.x_train, &runs.x_test, 2, reps, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert!((0.0..=1.0).contains(&t) && t >= previous);
        previous = t;
    }
    let total = |threshold| {
        total_capacity(&runs.x_train, &runs.x_test, &runs.inputs_train, &runs.inputs_test, 1, threshold, 50).unwrap()
    };
    let cut = total(1.0);
    assert_eq!((cut.total, cut.tau_max), (0.0, 0));
    let mut previous = f64::INFINITY;
    for threshold in [0.0, 0.01, 0.05, 0.2, 0.5, 0.9] {
        let t = total(threshold);
        assert!(t.total <= previous && t.total <= (t.tau_max as f64));
        assert!(t.records.iter().all(|r| (0.0..=1.0).contains(&r.capacity)));
        previous = t.total;
    }
}

#[test]
fn constant_features_give_zero_threshold() {
    let readouts = DMatrix::from_element(100, 3, -1.0);
    let x = StateCollectMatrix::from_readouts(&readouts, 3, 1).unwrap();
    let t = noise_threshold(&x, &x, 1, 50, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
    assert_eq!(t, 0.0);
}

#[test]
fn reused_factorization_matches_fresh_solve() {
    let x = random_design(80, 6, 2);
    let solver = LeastSquares::new(x.data()).unwrap();
    for seed in 0..5 {
        let y = random_vec(80, seed);
        let fresh = train_readout(&x, &y).unwrap().weights;
        assert_eq!(solver.solve(&y).unwrap(), fresh);
    }
}

#[test]
fn measurement_is_unbiased() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let shots = 1000;
    for x in [-0.9, 0.0, 0.9] {
        let draws: Vec<f64> = (0..100_000).map(|_| measure(x, ShotModel::Finite(shots), &mut rng).unwrap()).collect();
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        let p: f64 = (1.0 + x) / 2.0;
        let std_err = 2.0 * (p * (1.0 - p) / shots as f64).sqrt() / (draws.len() as f64).sqrt();
        assert!((mean - x).abs() <= 5.0 * std_err, "x = {x}: mean {mean}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn capacity_is_affine_invariant_and_bounded(seed in any::<u64>(), a in -5.0f64..5.0, b in -5.0f64..5.0) {
        prop_assume!(a.abs() > 1e-3);
        let y = random_vec(50, seed);
        let yhat = random_vec(50, seed ^ 1);
        let c = capacity(&yhat, &y).unwrap();
        prop_assert!((0.0..=1.0).contains(&c));
        let scaled: Vec<f64> = yhat.iter().map(|v| a * v + b).collect();
        prop_assert!((capacity(&scaled, &y).unwrap() - c).abs() < 1e-12);
        let scaled_target: Vec<f64> = y.iter().map(|v| a * v + b).collect();
        prop_assert!((capacity(&yhat, &scaled_target).unwrap() - c).abs() < 1e-12);
    }

    #[test]
    fn sampled_networks_respect_topology_and_scale(n in 1usize..=4, j0 in 0.01f64..3.0, seed in any::<u64>(), ring in any::<bool>()) {
        let topology = if ring { Topology::Ring } else { Topology::AllToAll };
        let spec = sample_network(n, j0, 1.0, topology, seed).unwrap();
        let j = &spec.coupling;
        for r in 0..n {
            for c in 0..n {
                prop_assert_eq!(j[(r, c)], j[(c, r)]);
                if !topology.connects(r, c, n) {
                    prop_assert_eq!(j[(r, c)], 0.0);
                }
            }
        }
        if n > 1 {
            let radius = spectral_radius(j);
            prop_assert!((radius - j0).abs() < 1e-12 * j0.max(1.0));
            let again = j * (j0 / radius);
            prop_assert!((&again - j).amax() < 1e-12);
        }
    }
}

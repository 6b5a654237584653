mod common;

use common::{dense_hamiltonian, propagate_midpoint, sigma_z, single_site};
use fairqa::ising::{enumerate_ground_states, BasisState, SpinInstance};
use fairqa::models;
use fairqa::perturbation::hz_eigenvalue;
use fairqa::quantum::{
    build_hamiltonian, evolve, evolve_with_stats, hz_ground_state, initial_state, run_reverse_trials, AnnealRunSpec,
    DiagonalPerturbation, IntegratorSettings, TrialDesign, NORM_LIMIT,
};
use fairqa::schedule::{AnnealSchedule, ScheduleKind};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

/// `(d, p, z)` written out directly from the schedule definitions.
fn coefficients(kind: ScheduleKind, amplitude: f64, s: f64) -> (f64, f64, f64) {
    let d = match kind {
        ScheduleKind::Vanilla => 1.0 - s,
        ScheduleKind::QuadraticReverse => s * (1.0 - s),
        ScheduleKind::PiecewiseReverse if s < 0.5 => s * (1.0 - s),
        ScheduleKind::PiecewiseReverse if s < 0.9 => -25.0 / 16.0 * s * s + 25.0 / 16.0 * s - 9.0 / 64.0,
        ScheduleKind::PiecewiseReverse => 0.0,
    };
    let z = if kind == ScheduleKind::Vanilla { 0.0 } else { 1.0 - s };
    (amplitude * d, s, z)
}

fn triples(instance: &SpinInstance) -> Vec<(usize, usize, f64)> {
    instance.couplings().iter().map(|c| (c.i, c.j, c.value)).collect()
}

fn spec(instance: &SpinInstance, kind: ScheduleKind, total_time: f64, c: Option<Vec<f64>>) -> AnnealRunSpec {
    AnnealRunSpec {
        instance: instance.clone(),
        schedule: AnnealSchedule::new(kind),
        total_time,
        perturbation: c.map(|c| DiagonalPerturbation { c, seed: 0 }),
        integrator: IntegratorSettings::default(),
    }
}

fn arb_instance(max_n: usize, with_bias: bool) -> impl Strategy<Value = SpinInstance> {
    (2..=max_n).prop_flat_map(move |n| {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        let m = pairs.len();
        (
            Just(n),
            Just(pairs),
            proptest::collection::vec(prop_oneof![Just(0.0), -2.0..2.0f64], m),
            proptest::collection::vec(-1.0..1.0f64, n),
        )
            .prop_map(move |(n, pairs, js, hs)| {
                let edges = pairs.into_iter().zip(js).filter(|&(_, j)| j != 0.0).map(|((i, k), j)| (i, k, j));
                let hs = if with_bias { hs } else { vec![0.0; n] };
                SpinInstance::with_biases(n, edges, hs).unwrap()
            })
    })
}

fn arb_kind() -> impl Strategy<Value = ScheduleKind> {
    prop_oneof![
        Just(ScheduleKind::Vanilla),
        Just(ScheduleKind::QuadraticReverse),
        Just(ScheduleKind::PiecewiseReverse)
    ]
}

#[test]
fn hz_eigenvalues_equal_explicit_operator_diagonal() {
    let mut rng_seed = 0u64;
    for n in 1..=6 {
        for _ in 0..20 {
            rng_seed += 1;
            let p = DiagonalPerturbation::draw(n, rng_seed);
            let mut hz = DMatrix::<f64>::zeros(1 << n, 1 << n);
            for (i, &c) in p.c.iter().enumerate() {
                hz += c * single_site(&sigma_z(), i, n);
            }
            for k in 0..(1u64 << n) {
                let state = BasisState::new(n, k).unwrap();
                let mu = hz_eigenvalue(&p, &state).unwrap();
                assert!((mu - hz[(k as usize, k as usize)]).abs() <= 1e-12, "n={n} k={k}");
                assert!((mu - p.diagonal()[k as usize]).abs() <= 1e-12);
            }
            // reverse runs start in the lowest diagonal entry
            let g = hz_ground_state(&p).unwrap();
            let min = (0..1 << n).map(|k| hz[(k, k)]).fold(f64::INFINITY, f64::min);
            assert_eq!(hz[(g.index() as usize, g.index() as usize)], min);
        }
    }
}

#[test]
fn initial_states() {
    let inst = SpinInstance::new(3, [(0, 1, 1.0), (1, 2, -1.0)]).unwrap();
    let uniform = initial_state(&spec(&inst, ScheduleKind::Vanilla, 1.0, None)).unwrap();
    assert!(uniform.probabilities().iter().all(|p| (p - 0.125).abs() < 1e-15));
    // c = (+, -, +) puts bits 1, 0, 1
    let basis = initial_state(&spec(&inst, ScheduleKind::PiecewiseReverse, 1.0, Some(vec![0.3, -0.7, 1.1]))).unwrap();
    assert_eq!(basis.probabilities()[0b101], 1.0);
}

#[test]
fn evolution_matches_exponential_midpoint_reference() {
    let inst = SpinInstance::with_biases(3, [(0, 1, 1.0), (1, 2, -2.0), (0, 2, 0.5)], vec![0.2, 0.0, -0.3]).unwrap();
    let c = vec![0.8, -0.4, 1.3];
    for (kind, c) in [
        (ScheduleKind::Vanilla, None),
        (ScheduleKind::QuadraticReverse, Some(c.clone())),
        (ScheduleKind::PiecewiseReverse, Some(c.clone())),
    ] {
        let total_time = 4.0;
        let run = spec(&inst, kind, total_time, c.clone());
        let got = evolve(&run).unwrap();
        let psi0 = initial_state(&run).unwrap().amplitudes;
        let zero = vec![0.0; 3];
        let cz = c.clone().unwrap_or(zero);
        let reference = propagate_midpoint(&psi0, total_time, 6000, |s| {
            dense_hamiltonian(3, &triples(&inst), inst.biases(), &cz, coefficients(kind, 1.0, s))
        });
        for (a, b) in got.amplitudes.iter().zip(&reference) {
            assert!((a.norm_sqr() - b.norm_sqr()).abs() < 1e-5, "{kind}: {a} vs {b}");
        }
        assert!((got.fidelity(&fairqa::quantum::QuantumState { amplitudes: reference }) - 1.0).abs() < 1e-5);
    }
}

#[test]
fn slow_vanilla_anneal_reaches_unique_ground_state() {
    let inst = SpinInstance::with_biases(2, [(0, 1, 1.0)], vec![0.5, 0.0]).unwrap();
    let out = evolve(&spec(&inst, ScheduleKind::Vanilla, 200.0, None)).unwrap();
    assert!(out.probabilities()[0] > 0.99);
}

#[test]
fn norm_drift_is_reported_and_bounded() {
    let inst = models::by_name("a").unwrap();
    for total_time in [1.0, 100.0] {
        let ev = evolve_with_stats(&spec(&inst, ScheduleKind::Vanilla, total_time, None)).unwrap();
        assert!(ev.stats.max_norm_drift < NORM_LIMIT);
        assert!((ev.state.norm() - 1.0).abs() < NORM_LIMIT);
        assert!(ev.stats.accepted > 0);
    }
}

#[test]
fn halving_tolerance_changes_probabilities_little() {
    let inst = models::by_name("d").unwrap();
    let ground = enumerate_ground_states(&inst).unwrap();
    let base = IntegratorSettings::default();
    let half = IntegratorSettings { tolerance: base.tolerance / 2.0, ..base };
    let schedule = AnnealSchedule::new(ScheduleKind::PiecewiseReverse);
    let a = run_reverse_trials(&inst, &schedule, 50.0, 4, 9, TrialDesign::Stratified, base).unwrap();
    let b = run_reverse_trials(&inst, &schedule, 50.0, 4, 9, TrialDesign::Stratified, half).unwrap();
    assert_eq!(a.ground, ground);
    for (x, y) in a.average.probabilities.iter().zip(&b.average.probabilities) {
        assert!((x - y).abs() < 1e-4, "{x} vs {y}");
    }
}

#[test]
fn invalid_runs_are_rejected() {
    let inst = SpinInstance::new(2, [(0, 1, 1.0)]).unwrap();
    assert!(evolve(&spec(&inst, ScheduleKind::PiecewiseReverse, 1.0, None)).is_err());
    assert!(evolve(&spec(&inst, ScheduleKind::Vanilla, 1.0, Some(vec![1.0, 1.0]))).is_err());
    assert!(evolve(&spec(&inst, ScheduleKind::QuadraticReverse, 1.0, Some(vec![1.0]))).is_err());
    assert!(evolve(&spec(&inst, ScheduleKind::Vanilla, 0.0, None)).is_err());
    let big = SpinInstance::new(13, (0..12).map(|i| (i, i + 1, 1.0))).unwrap();
    let err = evolve(&spec(&big, ScheduleKind::Vanilla, 1.0, None)).unwrap_err();
    assert!(!err.is_numerical());
    let vanilla = AnnealSchedule::new(ScheduleKind::Vanilla);
    assert!(run_reverse_trials(&inst, &vanilla, 1.0, 2, 0, TrialDesign::Independent, Default::default()).is_err());
}

#[test]
fn design_reproducibility() {
    let inst = models::by_name("d").unwrap();
    let schedule = AnnealSchedule::new(ScheduleKind::QuadraticReverse);
    for design in [TrialDesign::Independent, TrialDesign::Antithetic, TrialDesign::Stratified] {
        let a = run_reverse_trials(&inst, &schedule, 5.0, 3, 77, design, Default::default()).unwrap();
        let b = run_reverse_trials(&inst, &schedule, 5.0, 3, 77, design, Default::default()).unwrap();
        assert_eq!(a, b);
        if design != TrialDesign::Independent {
            assert_eq!(a.trials[1].perturbation.c, a.trials[0].perturbation.negated().c);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn hamiltonian_is_hermitian_and_matches_pauli_construction(
        inst in arb_instance(5, true),
        kind in arb_kind(),
        s in 0.0..=1.0f64,
        amplitude in 0.1..3.0f64,
        seed in any::<u64>(),
    ) {
        let n = inst.n();
        let c = DiagonalPerturbation::draw(n, seed);
        let mut run = spec(&inst, kind, 1.0, kind.is_reverse().then(|| c.c.clone()));
        run.schedule = AnnealSchedule::with_amplitude(kind, amplitude).unwrap();
        let dense = build_hamiltonian(&run, s).unwrap().to_dense();
        prop_assert_eq!(&dense, &dense.transpose());
        let cz = if kind.is_reverse() { c.c.clone() } else { vec![0.0; n] };
        let reference = dense_hamiltonian(n, &triples(&inst), inst.biases(), &cz, coefficients(kind, amplitude, s));
        prop_assert!((dense - reference).abs().max() < 1e-12);
    }

    #[test]
    fn sparse_apply_matches_dense_product(inst in arb_instance(5, true), s in 0.0..=1.0f64, seed in any::<u64>()) {
        let run = spec(&inst, ScheduleKind::Vanilla, 1.0, None);
        let h = build_hamiltonian(&run, s).unwrap();
        let dim = h.dim();
        let psi: Vec<Complex64> = (0..dim)
            .map(|k| Complex64::new(((seed >> (k % 60)) & 7) as f64 - 3.5, k as f64 * 0.1))
            .collect();
        let mut out = vec![Complex64::new(0.0, 0.0); dim];
        h.apply(&psi, &mut out);
        let dense = h.to_dense();
        for r in 0..dim {
            let expected: Complex64 = (0..dim).map(|k| psi[k] * dense[(r, k)]).sum();
            prop_assert!((out[r] - expected).norm() < 1e-10);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn zero_bias_vanilla_anneal_is_complement_symmetric(inst in arb_instance(5, false), total_time in 0.5..20.0f64) {
        let out = evolve(&spec(&inst, ScheduleKind::Vanilla, total_time, None)).unwrap();
        let p = out.probabilities();
        let mask = p.len() - 1;
        for k in 0..p.len() {
            prop_assert!((p[k] - p[!k & mask]).abs() < 1e-6);
        }
    }

    #[test]
    fn reverse_runs_keep_norm(inst in arb_instance(5, true), kind in prop_oneof![Just(ScheduleKind::QuadraticReverse), Just(ScheduleKind::PiecewiseReverse)], total_time in 0.5..50.0f64, seed in any::<u64>()) {
        let c = DiagonalPerturbation::draw(inst.n(), seed).c;
        let ev = evolve_with_stats(&spec(&inst, kind, total_time, Some(c))).unwrap();
        prop_assert!(ev.stats.max_norm_drift < NORM_LIMIT);
        prop_assert!((ev.state.norm() - 1.0).abs() < NORM_LIMIT);
    }
}

use fairqa::classical::{beta_grid, pt_icm, pt_icm_run, simulated_annealing, BetaLadder, PtIcmConfig, SampleBatch};
use fairqa::ising::{enumerate_ground_states, generate_spinglass, graph, BasisState, SpinInstance};
use fairqa::models;
use proptest::prelude::*;

/// Exact Boltzmann weights at inverse temperature `beta` by enumeration.
fn boltzmann(instance: &SpinInstance, beta: f64) -> Vec<f64> {
    let n = instance.n();
    let energies: Vec<f64> = (0..1u64 << n).map(|k| instance.energy_of_index(k)).collect();
    let e0 = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let w: Vec<f64> = energies.iter().map(|e| (-beta * (e - e0)).exp()).collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|x| x / z).collect()
}

fn total_variation(batch: &SampleBatch, exact: &[f64]) -> f64 {
    exact
        .iter()
        .enumerate()
        .map(|(k, p)| (batch.counts.get(&(k as u64)).copied().unwrap_or(0) as f64 / batch.total as f64 - p).abs())
        .sum::<f64>()
        / 2.0
}

fn frustrated_square() -> SpinInstance {
    SpinInstance::with_biases(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (0, 3, -1.0), (0, 2, 0.5)], vec![0.3, 0.0, -0.2, 0.0])
        .unwrap()
}

#[test]
fn sa_at_fixed_temperature_is_boltzmann() {
    // a two-rung ladder that barely moves acts as a long fixed-β chain per read
    let inst = frustrated_square();
    let ladder = BetaLadder { beta_min: 0.5, beta_max: 0.5001, beta_ratio: 1.5 };
    assert_eq!(beta_grid(&ladder).unwrap().len(), 2);
    let batch = simulated_annealing(&inst, 20_000, 100, &ladder, 3).unwrap();
    let tv = total_variation(&batch, &boltzmann(&inst, 0.5));
    // independent reads: E[TV] ≈ Σ sqrt(p(1-p)/(2πN)) < 0.01 here
    assert!(tv < 0.02, "total variation {tv}");
}

#[test]
fn pt_icm_cold_rung_is_boltzmann() {
    let inst = frustrated_square();
    let config = PtIcmConfig {
        ladder: BetaLadder { beta_min: 0.2, beta_max: 0.7, beta_ratio: 1.3 },
        n_sweeps: 2000,
        n_samples: 40_000,
        sample_interval: 5,
        seed: 8,
        ..PtIcmConfig::default()
    };
    let batch = pt_icm(&inst, &config).unwrap();
    assert_eq!(batch.total, 40_000);
    let tv = total_variation(&batch, &boltzmann(&inst, 0.7));
    assert!(tv < 0.03, "total variation {tv}");
}

#[test]
fn sa_sees_every_model_ground_state() {
    for name in ["a", "b", "c", "d"] {
        let inst = models::by_name(name).unwrap();
        let ground = enumerate_ground_states(&inst).unwrap();
        let batch = simulated_annealing(&inst, 4000, 1000, &BetaLadder::default(), 17).unwrap();
        assert_eq!(batch.energy_of_best, ground.energy, "{name}");
        for g in &ground.states {
            assert!(batch.count(g) > 0, "{name}: {g} never sampled");
        }
    }
}

#[test]
fn pt_icm_counts_on_a_model_are_balanced() {
    // at β = 20 the cold rung is essentially uniform over the ground set
    let inst = models::by_name("c").unwrap();
    let ground = enumerate_ground_states(&inst).unwrap();
    let run = pt_icm_run(&inst, &PtIcmConfig { seed: 4, ..PtIcmConfig::default() }).unwrap();
    assert_eq!(run.recorded_ground_energy, Some(ground.energy));
    let counts: Vec<u64> = ground.states.iter().map(|g| run.batch.count(g)).collect();
    let (lo, hi) = (*counts.iter().min().unwrap(), *counts.iter().max().unwrap());
    assert!(lo > 0 && hi <= 3 * lo, "{counts:?}");
    assert!(run.swap_acceptance_rate > 0.0 && run.swap_acceptance_rate <= 1.0);
}

#[test]
fn samplers_reach_minimum_on_a_grid_glass() {
    let inst = generate_spinglass(16, &graph::grid(4, 4), 1).unwrap().into_instance().unwrap();
    let ground = enumerate_ground_states(&inst).unwrap();
    let sa = simulated_annealing(&inst, 200, 2000, &BetaLadder::default(), 2).unwrap();
    assert_eq!(sa.energy_of_best, ground.energy);
    let pt = pt_icm_run(&inst, &PtIcmConfig { n_sweeps: 4000, seed: 2, ..PtIcmConfig::default() }).unwrap();
    assert_eq!(pt.batch.energy_of_best, ground.energy);
    assert_eq!(pt.recorded_ground_energy, Some(ground.energy));
}

#[test]
fn invalid_configurations() {
    let inst = models::by_name("a").unwrap();
    assert!(pt_icm(&inst, &PtIcmConfig { replicas_per_beta: 3, ..PtIcmConfig::default() }).is_err());
    assert!(pt_icm(&inst, &PtIcmConfig { sample_interval: 0, ..PtIcmConfig::default() }).is_err());
    let bad = BetaLadder { beta_ratio: 1.0, ..BetaLadder::default() };
    assert!(simulated_annealing(&inst, 1, 1, &bad, 0).is_err());
    let big = SpinInstance::new(31, (0..30).map(|i| (i, i + 1, 1.0))).unwrap();
    assert!(simulated_annealing(&big, 1, 1, &BetaLadder::default(), 0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn merge_adds_histograms(a in proptest::collection::vec(0u64..16, 0..50), b in proptest::collection::vec(0u64..16, 0..50)) {
        let fill = |xs: &[u64]| {
            let mut batch = SampleBatch::new(4, "t", 0);
            for &x in xs {
                batch.record(BasisState::new(4, x).unwrap());
            }
            batch
        };
        let mut left = fill(&a);
        left.merge(&fill(&b));
        let both: Vec<u64> = a.iter().chain(&b).copied().collect();
        let joint = fill(&both);
        prop_assert_eq!(left.counts, joint.counts);
        prop_assert_eq!(left.total, both.len() as u64);
    }

    #[test]
    fn beta_grid_is_geometric(beta_min in 0.01..1.0f64, span in 1.5..100.0f64, ratio in 1.05..2.0f64) {
        let ladder = BetaLadder { beta_min, beta_max: beta_min * span, beta_ratio: ratio };
        let grid = beta_grid(&ladder).unwrap();
        prop_assert_eq!(grid[0], beta_min);
        prop_assert_eq!(*grid.last().unwrap(), ladder.beta_max);
        for w in grid[..grid.len() - 1].windows(2) {
            prop_assert!((w[1] / w[0] - ratio).abs() < 1e-12);
        }
        prop_assert!(grid.windows(2).all(|w| w[1] > w[0]));
    }
}

//! Classical baselines: single-spin-flip simulated annealing and parallel
//! tempering with Houdayer isoenergetic cluster moves (PT-ICM).

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ising::{BasisState, SpinInstance, MAX_ENUMERATION_SPINS};
use crate::rng;

/// Histogram of sampled basis states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch {
    pub n: usize,
    /// State index → count.
    pub counts: BTreeMap<u64, u64>,
    pub total: u64,
    /// Lowest energy the sampler encountered.
    pub energy_of_best: f64,
    pub sampler_label: String,
    pub seed: u64,
}

impl SampleBatch {
    pub fn new(n: usize, sampler_label: impl Into<String>, seed: u64) -> Self {
        SampleBatch {
            n,
            counts: BTreeMap::new(),
            total: 0,
            energy_of_best: f64::INFINITY,
            sampler_label: sampler_label.into(),
            seed,
        }
    }

    pub fn record(&mut self, state: BasisState) {
        *self.counts.entry(state.index()).or_default() += 1;
        self.total += 1;
    }

    pub fn count(&self, state: &BasisState) -> u64 {
        self.counts.get(&state.index()).copied().unwrap_or(0)
    }

    pub fn merge(&mut self, other: &SampleBatch) {
        for (&k, &c) in &other.counts {
            *self.counts.entry(k).or_default() += c;
        }
        self.total += other.total;
        self.energy_of_best = self.energy_of_best.min(other.energy_of_best);
    }
}

/// Geometric inverse-temperature ladder shared by both samplers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaLadder {
    pub beta_min: f64,
    pub beta_max: f64,
    /// Ratio between successive rungs.
    pub beta_ratio: f64,
}

impl Default for BetaLadder {
    fn default() -> Self {
        BetaLadder { beta_min: 1.0 / 3.05, beta_max: 1.0 / 0.05, beta_ratio: 1.22 }
    }
}

/// `β_k = β_min · ratio^k` while below `β_max`, with a final rung at exactly `β_max`.
pub fn beta_grid(ladder: &BetaLadder) -> Result<Vec<f64>> {
    let BetaLadder { beta_min, beta_max, beta_ratio } = *ladder;
    if !(beta_ratio > 1.0 && beta_ratio.is_finite()) {
        return Err(Error::input(format!("beta ratio must exceed 1, got {beta_ratio}")));
    }
    if !(beta_min > 0.0 && beta_max > beta_min && beta_max.is_finite()) {
        return Err(Error::input(format!("invalid beta range [{beta_min}, {beta_max}]")));
    }
    let mut grid = Vec::new();
    let mut beta = beta_min;
    while beta < beta_max {
        grid.push(beta);
        beta *= beta_ratio;
    }
    grid.push(beta_max);
    Ok(grid)
}

/// Spin configuration with cached energy.
#[derive(Debug, Clone)]
struct Replica {
    spins: Vec<i8>,
    energy: f64,
}

impl Replica {
    fn random(instance: &SpinInstance, rng: &mut impl Rng) -> Self {
        let spins: Vec<i8> = (0..instance.n()).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
        let energy = config_energy(instance, &spins);
        Replica { spins, energy }
    }

    fn state(&self) -> BasisState {
        let n = self.spins.len();
        let index = self.spins.iter().fold(0u64, |acc, &s| (acc << 1) | u64::from(s < 0));
        BasisState::new(n, index).expect("n within range")
    }

    fn local_field(&self, instance: &SpinInstance, adj: &[Vec<(usize, f64)>], i: usize) -> f64 {
        adj[i].iter().fold(instance.biases()[i], |f, &(k, j)| f + j * f64::from(self.spins[k]))
    }

    /// Metropolis update of spin `i` at inverse temperature `beta`.
    fn metropolis(&mut self, instance: &SpinInstance, adj: &[Vec<(usize, f64)>], i: usize, beta: f64, rng: &mut impl Rng) {
        let delta = 2.0 * f64::from(self.spins[i]) * self.local_field(instance, adj, i);
        if delta <= 0.0 || rng.random::<f64>() < (-beta * delta).exp() {
            self.spins[i] = -self.spins[i];
            self.energy += delta;
        }
    }
}

fn config_energy(instance: &SpinInstance, spins: &[i8]) -> f64 {
    let mut e = 0.0;
    for c in instance.couplings() {
        e -= c.value * f64::from(spins[c.i]) * f64::from(spins[c.j]);
    }
    for (i, &h) in instance.biases().iter().enumerate() {
        e -= h * f64::from(spins[i]);
    }
    e
}

fn check_size(instance: &SpinInstance) -> Result<()> {
    if instance.n() > MAX_ENUMERATION_SPINS {
        return Err(Error::Resource(format!(
            "classical samplers limited to {MAX_ENUMERATION_SPINS} spins, got {}",
            instance.n()
        )));
    }
    Ok(())
}

/// Independent annealing restarts; each read walks the β ladder from hot to
/// cold with `sweeps_per_read` sequential Metropolis passes spread evenly
/// over the rungs, and contributes its final state.
pub fn simulated_annealing(
    instance: &SpinInstance,
    n_reads: usize,
    sweeps_per_read: usize,
    ladder: &BetaLadder,
    seed: u64,
) -> Result<SampleBatch> {
    check_size(instance)?;
    let grid = beta_grid(ladder)?;
    let passes_per_rung = (sweeps_per_read / grid.len()).max(1);
    let adj = instance.adjacency();
    let n = instance.n();

    let finals: Vec<Replica> = (0..n_reads)
        .into_par_iter()
        .map(|read| {
            let mut rng = rng::stream_rng(seed, read as u64);
            let mut replica = Replica::random(instance, &mut rng);
            for &beta in &grid {
                for _ in 0..passes_per_rung {
                    for i in 0..n {
                        replica.metropolis(instance, &adj, i, beta, &mut rng);
                    }
                }
            }
            replica
        })
        .collect();

    let mut batch = SampleBatch::new(n, "sa", seed);
    for r in &finals {
        batch.energy_of_best = batch.energy_of_best.min(r.energy);
        batch.record(r.state());
    }
    Ok(batch)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PtIcmConfig {
    pub ladder: BetaLadder,
    pub replicas_per_beta: usize,
    /// Sweeps before any sample is taken.
    pub n_sweeps: usize,
    /// Samples drawn from the two coldest replicas after `n_sweeps`.
    pub n_samples: usize,
    /// Sweeps between successive sample points.
    pub sample_interval: usize,
    pub seed: u64,
}

impl Default for PtIcmConfig {
    fn default() -> Self {
        PtIcmConfig {
            ladder: BetaLadder::default(),
            replicas_per_beta: 2,
            n_sweeps: 10_000,
            n_samples: 4000,
            sample_interval: 10,
            seed: 0,
        }
    }
}

/// `min(1, exp((β_i − β_j)(E_i − E_j)))` for exchanging two replicas.
pub fn swap_acceptance(beta_i: f64, beta_j: f64, e_i: f64, e_j: f64) -> f64 {
    ((beta_i - beta_j) * (e_i - e_j)).exp().min(1.0)
}

/// Houdayer move on two replicas: flips one randomly chosen connected cluster
/// of disagreeing sites in both. Returns the cluster size (0 when the replicas
/// agree everywhere). The summed energy of the pair is unchanged.
fn houdayer_move(
    instance: &SpinInstance,
    adj: &[Vec<(usize, f64)>],
    a: &mut Replica,
    b: &mut Replica,
    rng: &mut impl Rng,
) -> usize {
    let disagree: Vec<usize> = (0..a.spins.len()).filter(|&i| a.spins[i] != b.spins[i]).collect();
    if disagree.is_empty() {
        return 0;
    }
    let seed = disagree[rng.random_range(0..disagree.len())];
    let mut in_cluster = vec![false; a.spins.len()];
    let mut stack = vec![seed];
    in_cluster[seed] = true;
    let mut cluster = Vec::new();
    while let Some(i) = stack.pop() {
        cluster.push(i);
        for &(k, _) in &adj[i] {
            if !in_cluster[k] && a.spins[k] != b.spins[k] {
                in_cluster[k] = true;
                stack.push(k);
            }
        }
    }
    let joint = a.energy + b.energy;
    for &i in &cluster {
        a.spins[i] = -a.spins[i];
        b.spins[i] = -b.spins[i];
    }
    a.energy = config_energy(instance, &a.spins);
    b.energy = config_energy(instance, &b.spins);
    debug_assert!(
        (a.energy + b.energy - joint).abs() <= 1e-9 * instance.energy_scale().max(1.0),
        "cluster move changed the joint energy"
    );
    cluster.len()
}

/// Outcome of a PT-ICM run beyond the sample histogram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PtIcmRun {
    pub batch: SampleBatch,
    /// Lowest energy recorded by the cold-pair agreement rule, if it fired.
    pub recorded_ground_energy: Option<f64>,
    pub swap_acceptance_rate: f64,
    pub mean_cluster_size: f64,
}

pub fn pt_icm(instance: &SpinInstance, config: &PtIcmConfig) -> Result<SampleBatch> {
    pt_icm_run(instance, config).map(|r| r.batch)
}

/// Parallel tempering with isoenergetic cluster moves.
///
/// Per sweep: (a) `N` random-site Metropolis updates on one randomly selected
/// replica at every β; (b) one Houdayer move between the two replicas at a
/// randomly chosen β; (c) one exchange attempt between a random adjacent β
/// pair, applied to each replica slot. After half of `n_sweeps`, agreement in
/// energy of the two coldest replicas records a ground-energy estimate, which
/// later lower observations replace.
pub fn pt_icm_run(instance: &SpinInstance, config: &PtIcmConfig) -> Result<PtIcmRun> {
    check_size(instance)?;
    if config.replicas_per_beta != 2 {
        return Err(Error::input("isoenergetic cluster moves need exactly two replicas per beta"));
    }
    if config.n_samples > 0 && config.sample_interval == 0 {
        return Err(Error::input("sample interval must be positive"));
    }
    let grid = beta_grid(&config.ladder)?;
    let rungs = grid.len();
    let adj = instance.adjacency();
    let n = instance.n();

    let mut global = rng::stream_rng(config.seed, 0);
    // stream per (rung, slot) position
    let mut streams: Vec<[ChaCha12Rng; 2]> = (0..rungs)
        .map(|b| {
            let base = 1 + 2 * b as u64;
            [rng::stream_rng(config.seed, base), rng::stream_rng(config.seed, base + 1)]
        })
        .collect();
    let mut replicas: Vec<[Replica; 2]> = (0..rungs)
        .map(|b| {
            let [r0, r1] = &mut streams[b];
            [Replica::random(instance, r0), Replica::random(instance, r1)]
        })
        .collect();

    let mut best = f64::INFINITY;
    let mut recorded: Option<f64> = None;
    let mut swaps = (0usize, 0usize);
    let mut clusters = (0usize, 0usize);
    let mut batch = SampleBatch::new(n, "pt-icm", config.seed);
    let sample_points = config.n_samples.div_ceil(2);
    let total_sweeps = config.n_sweeps + sample_points * config.sample_interval;
    let cold = rungs - 1;

    for sweep in 1..=total_sweeps {
        for b in 0..rungs {
            let slot = global.random_range(0..2);
            let rng = &mut streams[b][slot];
            let replica = &mut replicas[b][slot];
            for _ in 0..n {
                let i = rng.random_range(0..n);
                replica.metropolis(instance, &adj, i, grid[b], rng);
            }
        }

        let b = global.random_range(0..rungs);
        let [x, y] = &mut replicas[b];
        let size = houdayer_move(instance, &adj, x, y, &mut global);
        if size > 0 {
            clusters.0 += 1;
            clusters.1 += size;
        }

        if rungs > 1 {
            let b = global.random_range(0..rungs - 1);
            for slot in 0..2 {
                let (lo, hi) = replicas.split_at_mut(b + 1);
                let (r_lo, r_hi) = (&mut lo[b][slot], &mut hi[0][slot]);
                swaps.1 += 1;
                if global.random::<f64>() < swap_acceptance(grid[b], grid[b + 1], r_lo.energy, r_hi.energy) {
                    std::mem::swap(r_lo, r_hi);
                    swaps.0 += 1;
                }
            }
        }

        let sweep_min = replicas.iter().flat_map(|p| p.iter().map(|r| r.energy)).fold(f64::INFINITY, f64::min);
        best = best.min(sweep_min);
        if 2 * sweep > config.n_sweeps {
            let [c0, c1] = &replicas[cold];
            if c0.energy == c1.energy && recorded.is_none_or(|e| c0.energy < e) {
                recorded = Some(c0.energy);
            }
            if let Some(e) = recorded {
                if sweep_min < e {
                    recorded = Some(sweep_min);
                }
            }
        }

        if sweep > config.n_sweeps && (sweep - config.n_sweeps).is_multiple_of(config.sample_interval) {
            for r in &replicas[cold] {
                if batch.total < config.n_samples as u64 {
                    batch.record(r.state());
                }
            }
        }
    }
    batch.energy_of_best = best;
    Ok(PtIcmRun {
        batch,
        recorded_ground_energy: recorded,
        swap_acceptance_rate: if swaps.1 == 0 { 0.0 } else { swaps.0 as f64 / swaps.1 as f64 },
        mean_cluster_size: if clusters.0 == 0 { 0.0 } else { clusters.1 as f64 / clusters.0 as f64 },
    })
}

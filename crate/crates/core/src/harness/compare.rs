//! Block-averaged sample counts of several samplers on one instance.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classical::{pt_icm, simulated_annealing, BetaLadder, PtIcmConfig, SampleBatch};
use crate::collector::UniformOracle;
use crate::error::{Error, Result};
use crate::ising::{enumerate_ground_states, BasisState, GroundSet, SpinInstance};
use crate::quantum::{evolve, AnnealRunSpec, IntegratorSettings, TrialDesign};
use crate::rng;
use crate::schedule::{AnnealSchedule, ScheduleKind};

/// A sampler taking part in a comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "sampler", rename_all = "kebab-case")]
pub enum SamplerSpec {
    /// Reverse-style anneals; each block runs `trials_per_block` fresh fields
    /// and draws its samples round-robin from their final distributions.
    QuantumReverse { schedule: AnnealSchedule, total_time: f64, trials_per_block: usize, design: TrialDesign },
    /// Standard anneal; samples are drawn from its single final distribution.
    QuantumVanilla { schedule: AnnealSchedule, total_time: f64 },
    SimulatedAnnealing { sweeps_per_read: usize, ladder: BetaLadder },
    PtIcm { config: PtIcmConfig },
    UniformOracle,
}

impl SamplerSpec {
    pub fn label(&self) -> String {
        match self {
            SamplerSpec::QuantumReverse { schedule, .. } => format!("quantum-{}", schedule.kind),
            SamplerSpec::QuantumVanilla { .. } => "quantum-vanilla".into(),
            SamplerSpec::SimulatedAnnealing { .. } => "sa".into(),
            SamplerSpec::PtIcm { .. } => "pt-icm".into(),
            SamplerSpec::UniformOracle => "uniform-oracle".into(),
        }
    }

    /// Default lineup: piecewise reverse and vanilla at driver amplitude 2,
    /// SA and PT-ICM.
    pub fn default_lineup(total_time: f64) -> Vec<SamplerSpec> {
        let at_two = |kind| AnnealSchedule::with_amplitude(kind, 2.0).expect("amplitude 2 is valid");
        vec![
            SamplerSpec::QuantumReverse {
                schedule: at_two(ScheduleKind::PiecewiseReverse),
                total_time,
                trials_per_block: 16,
                design: TrialDesign::default(),
            },
            SamplerSpec::QuantumVanilla { schedule: at_two(ScheduleKind::Vanilla), total_time },
            SamplerSpec::SimulatedAnnealing { sweeps_per_read: 1000, ladder: BetaLadder::default() },
            SamplerSpec::PtIcm { config: PtIcmConfig { n_sweeps: 2000, sample_interval: 5, ..PtIcmConfig::default() } },
        ]
    }
}

/// Per-ground-state statistics of one sampler.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerColumn {
    pub label: String,
    pub spec: SamplerSpec,
    /// Block mean of `m · count / block_size`.
    pub normed_mean: Vec<f64>,
    /// Standard error of `normed_mean` across blocks.
    pub normed_std_err: Vec<f64>,
    /// `ln` of `normed_mean`, floored at `ln(log_floor)`.
    pub log_normed: Vec<f64>,
    /// Delta-method standard error of `log_normed`.
    pub log_std_err: Vec<f64>,
    pub floored: Vec<bool>,
    /// Fraction of all samples that landed in the ground set.
    pub ground_fraction: f64,
    pub lowest_energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerComparison {
    pub ground: GroundSet,
    pub blocks: usize,
    pub block_size: usize,
    pub seed: u64,
    pub normalization: String,
    pub log_floor: f64,
    pub columns: Vec<SamplerColumn>,
}

const NORMALIZATION: &str = "m * count / block_size per block, averaged over blocks; 1 for a uniform ground-state sampler";

fn draw_from(probabilities: &[f64], n: usize, count: usize, rng: &mut impl rand::Rng, batch: &mut SampleBatch) -> Result<()> {
    let dist = WeightedIndex::new(probabilities).map_err(|e| Error::input(format!("bad distribution: {e}")))?;
    for _ in 0..count {
        batch.record(BasisState::new(n, dist.sample(rng) as u64)?);
    }
    Ok(())
}

fn run_block(instance: &SpinInstance, ground: &GroundSet, spec: &SamplerSpec, size: usize, seed: u64, cache: Option<&[f64]>) -> Result<SampleBatch> {
    let n = instance.n();
    let mut rng = rng::stream_rng(seed, 0);
    match spec {
        SamplerSpec::QuantumReverse { schedule, total_time, trials_per_block, design } => {
            if *trials_per_block == 0 {
                return Err(Error::input("trials_per_block must be positive"));
            }
            let mut batch = SampleBatch::new(n, spec.label(), seed);
            let tables: Vec<Vec<f64>> = (0..*trials_per_block)
                .into_par_iter()
                .map(|trial| {
                    let run = AnnealRunSpec {
                        instance: instance.clone(),
                        schedule: *schedule,
                        total_time: *total_time,
                        perturbation: Some(design.perturbation(n, seed, trial)),
                        integrator: IntegratorSettings::default(),
                    };
                    evolve(&run).map(|s| s.probabilities()).map_err(|e| Error::Trial { trial, source: Box::new(e) })
                })
                .collect::<Result<_>>()?;
            for (k, table) in tables.iter().enumerate() {
                // spread `size` samples as evenly as possible over the trials
                let share = size / tables.len() + usize::from(k < size % tables.len());
                draw_from(table, n, share, &mut rng, &mut batch)?;
            }
            batch.energy_of_best = lowest_in(instance, &batch);
            Ok(batch)
        }
        SamplerSpec::QuantumVanilla { .. } => {
            let mut batch = SampleBatch::new(n, spec.label(), seed);
            draw_from(cache.expect("vanilla table computed up front"), n, size, &mut rng, &mut batch)?;
            batch.energy_of_best = lowest_in(instance, &batch);
            Ok(batch)
        }
        SamplerSpec::SimulatedAnnealing { sweeps_per_read, ladder } => {
            simulated_annealing(instance, size, *sweeps_per_read, ladder, seed)
        }
        SamplerSpec::PtIcm { config } => pt_icm(instance, &PtIcmConfig { n_samples: size, seed, ..*config }),
        SamplerSpec::UniformOracle => {
            let mut oracle = UniformOracle::new(ground.states.clone(), seed)?;
            let mut batch = SampleBatch::new(n, spec.label(), seed);
            for _ in 0..size {
                batch.record(oracle.sample());
            }
            batch.energy_of_best = ground.energy;
            Ok(batch)
        }
    }
}

fn lowest_in(instance: &SpinInstance, batch: &SampleBatch) -> f64 {
    batch.counts.keys().map(|&k| instance.energy_of_index(k)).fold(f64::INFINITY, f64::min)
}

/// Runs every sampler for `blocks × block_size` samples and tabulates
/// block-averaged normalized ground-state counts and their logarithms.
///
/// Block `b` of sampler `k` is seeded from `(seed, k, b)`; zero means are
/// floored at half a count over all blocks before taking the log.
pub fn compare_samplers(
    instance: &SpinInstance,
    samplers: &[SamplerSpec],
    blocks: usize,
    block_size: usize,
    seed: u64,
) -> Result<SamplerComparison> {
    if blocks < 2 || block_size == 0 {
        return Err(Error::input("need at least two blocks of positive size"));
    }
    let ground = enumerate_ground_states(instance)?;
    let m = ground.m() as f64;
    let log_floor = m * 0.5 / (blocks * block_size) as f64;
    let mut columns = Vec::with_capacity(samplers.len());
    for (k, spec) in samplers.iter().enumerate() {
        let sampler_seed = rng::derive_seed(seed, k as u64);
        let cache = match spec {
            SamplerSpec::QuantumVanilla { schedule, total_time } => {
                let run = AnnealRunSpec {
                    instance: instance.clone(),
                    schedule: *schedule,
                    total_time: *total_time,
                    perturbation: None,
                    integrator: IntegratorSettings::default(),
                };
                Some(evolve(&run)?.probabilities())
            }
            _ => None,
        };
        let batches: Vec<SampleBatch> = (0..blocks)
            .map(|b| run_block(instance, &ground, spec, block_size, rng::derive_seed(sampler_seed, b as u64), cache.as_deref()))
            .collect::<Result<_>>()?;

        let normed: Vec<Vec<f64>> = batches
            .iter()
            .map(|batch| ground.states.iter().map(|s| m * batch.count(s) as f64 / block_size as f64).collect())
            .collect();
        let nb = blocks as f64;
        let mut normed_mean = vec![0.0; ground.m()];
        let mut normed_std_err = vec![0.0; ground.m()];
        for g in 0..ground.m() {
            let mean = normed.iter().map(|row| row[g]).sum::<f64>() / nb;
            let var = normed.iter().map(|row| (row[g] - mean).powi(2)).sum::<f64>() / (nb - 1.0);
            normed_mean[g] = mean;
            normed_std_err[g] = (var / nb).sqrt();
        }
        let floored: Vec<bool> = normed_mean.iter().map(|&x| x < log_floor).collect();
        let log_normed = normed_mean.iter().map(|&x| x.max(log_floor).ln()).collect();
        let log_std_err = normed_mean.iter().zip(&normed_std_err).map(|(&x, &se)| se / x.max(log_floor)).collect();
        let total: u64 = batches.iter().map(|b| b.total).sum();
        let in_ground: u64 = batches.iter().map(|b| ground.states.iter().map(|s| b.count(s)).sum::<u64>()).sum();
        columns.push(SamplerColumn {
            label: spec.label(),
            spec: spec.clone(),
            normed_mean,
            normed_std_err,
            log_normed,
            log_std_err,
            floored,
            ground_fraction: in_ground as f64 / total as f64,
            lowest_energy: batches.iter().map(|b| b.energy_of_best).fold(f64::INFINITY, f64::min),
        });
    }
    Ok(SamplerComparison {
        ground,
        blocks,
        block_size,
        seed,
        normalization: NORMALIZATION.into(),
        log_floor,
        columns,
    })
}

//! Experiment orchestration: anneal-time sweeps, sampler comparisons,
//! fairness metrics and result files.

mod compare;
mod output;

pub use compare::{compare_samplers, SamplerColumn, SamplerComparison, SamplerSpec};
pub use output::{
    emit_comparison, emit_results, read_results_json, write_comparison, write_json_value, write_results, OutputFormat,
};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classical::SampleBatch;
use crate::error::{Error, Result};
use crate::ising::{enumerate_ground_states, GroundSet, SpinInstance};
use crate::perturbation::chi_square_uniform;
use crate::quantum::{
    evolve_with_stats, measure_probabilities, run_reverse_trials_on, AnnealRunSpec, IntegratorSettings, TrialDesign,
};
use crate::schedule::{AnnealSchedule, ScheduleKind};

/// Suppression flag threshold relative to the uniform share `1/m`.
pub const HARD_THRESHOLD_FRACTION: f64 = 0.01;

/// Log-spaced anneal times from `t_min` to `t_max` inclusive; a single point
/// needs `t_min == t_max`.
pub fn log_time_grid(t_min: f64, t_max: f64, points: usize) -> Result<Vec<f64>> {
    if points == 1 && t_min == t_max && t_min > 0.0 && t_min.is_finite() {
        return Ok(vec![t_min]);
    }
    if !(t_min > 0.0 && t_max > t_min && t_max.is_finite()) || points < 2 {
        return Err(Error::input(format!("invalid time grid [{t_min}, {t_max}] with {points} points")));
    }
    let (a, b) = (t_min.log10(), t_max.log10());
    let mut grid: Vec<f64> = (0..points).map(|k| 10f64.powf(a + (b - a) * k as f64 / (points - 1) as f64)).collect();
    grid[0] = t_min;
    grid[points - 1] = t_max;
    Ok(grid)
}

/// 24 points from 0.1 to 1000.
pub fn default_time_grid() -> Vec<f64> {
    log_time_grid(0.1, 1000.0, 24).expect("static grid")
}

/// Uniformity diagnostics for a distribution over the ground set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FairnessReport {
    /// Probability (or observed frequency) of each ground state.
    pub probabilities: Vec<f64>,
    pub total_ground_mass: f64,
    /// `max/min` over the ground states; infinite when one is never seen.
    pub max_min_ratio: f64,
    /// Total variation distance of the ground-conditional distribution to uniform.
    pub total_variation: f64,
    /// `KL(q ‖ uniform)` of the ground-conditional distribution, in nats.
    pub kl_divergence: f64,
    /// Chi-square p-value against uniform; only for count data.
    pub chi_square_p: Option<f64>,
    pub hard_threshold: f64,
    pub hard_flags: Vec<bool>,
}

impl FairnessReport {
    pub fn from_probabilities(probabilities: &[f64], ground: &GroundSet) -> Result<Self> {
        let m = ground.m();
        if probabilities.len() != m {
            return Err(Error::input(format!("{} probabilities for {m} ground states", probabilities.len())));
        }
        if let Some(p) = probabilities.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::input(format!("invalid probability {p}")));
        }
        Self::build(probabilities.to_vec(), None)
    }

    /// Maximum-likelihood frequencies from a sample histogram; samples
    /// outside the ground set count toward the total only.
    pub fn from_batch(batch: &SampleBatch, ground: &GroundSet) -> Result<Self> {
        if batch.total == 0 {
            return Err(Error::input("sample batch is empty"));
        }
        if batch.n != ground.states[0].n() {
            return Err(Error::input(format!("batch has {} spins, ground set {}", batch.n, ground.states[0].n())));
        }
        let counts: Vec<u64> = ground.states.iter().map(|s| batch.count(s)).collect();
        let freqs = counts.iter().map(|&c| c as f64 / batch.total as f64).collect();
        let p = if counts.iter().sum::<u64>() > 0 { Some(chi_square_uniform(&counts).1) } else { None };
        Self::build(freqs, p)
    }

    fn build(probabilities: Vec<f64>, chi_square_p: Option<f64>) -> Result<Self> {
        let m = probabilities.len();
        let total: f64 = probabilities.iter().sum();
        if total <= 0.0 {
            return Err(Error::input("no probability mass on the ground set"));
        }
        let uniform = 1.0 / m as f64;
        let q: Vec<f64> = probabilities.iter().map(|p| p / total).collect();
        let total_variation = 0.5 * q.iter().map(|x| (x - uniform).abs()).sum::<f64>();
        let kl_divergence = q.iter().filter(|&&x| x > 0.0).map(|&x| x * (x * m as f64).ln()).sum::<f64>().max(0.0);
        let max = probabilities.iter().copied().fold(0.0, f64::max);
        let min = probabilities.iter().copied().fold(f64::INFINITY, f64::min);
        let max_min_ratio = if min > 0.0 { max / min } else { f64::INFINITY };
        let hard_threshold = HARD_THRESHOLD_FRACTION * uniform;
        let hard_flags = probabilities.iter().map(|&p| p < hard_threshold).collect();
        Ok(FairnessReport {
            probabilities,
            total_ground_mass: total,
            max_min_ratio,
            total_variation,
            kl_divergence,
            chi_square_p,
            hard_threshold,
            hard_flags,
        })
    }
}

/// Ground-state probabilities at one anneal time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub total_time: f64,
    /// Trial-averaged probability of each ground state.
    pub probabilities: Vec<f64>,
    /// Across-trial sample variance of each entry (zero for single runs).
    pub variance: Vec<f64>,
    pub total_mass: f64,
    pub total_mass_variance: f64,
    pub max_norm_drift: f64,
}

impl SweepPoint {
    pub fn fairness(&self, ground: &GroundSet) -> Result<FairnessReport> {
        FairnessReport::from_probabilities(&self.probabilities, ground)
    }
}

/// Everything needed to reproduce and plot one anneal-time sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub instance_label: String,
    pub schedule: AnnealSchedule,
    pub ground: GroundSet,
    pub points: Vec<SweepPoint>,
    pub n_trials: usize,
    pub master_seed: u64,
    pub design: TrialDesign,
    pub integrator: IntegratorSettings,
}

impl SweepResult {
    pub fn last(&self) -> &SweepPoint {
        self.points.last().expect("sweeps have at least one point")
    }
}

/// Sweep options beyond the instance and schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub time_grid: Vec<f64>,
    /// Reverse trials per anneal time; ignored for vanilla.
    pub n_trials: usize,
    pub master_seed: u64,
    pub design: TrialDesign,
    pub integrator: IntegratorSettings,
}

impl SweepConfig {
    pub fn new(time_grid: Vec<f64>, n_trials: usize, master_seed: u64) -> Self {
        SweepConfig {
            time_grid,
            n_trials,
            master_seed,
            design: TrialDesign::default(),
            integrator: IntegratorSettings::default(),
        }
    }
}

/// Runs the schedule at every anneal time: a single evolution for vanilla,
/// `n_trials` averaged reverse trials otherwise. The same trial fields are
/// used at every time.
pub fn sweep_anneal_time(instance: &SpinInstance, schedule: &AnnealSchedule, config: &SweepConfig) -> Result<SweepResult> {
    let grid = &config.time_grid;
    if grid.is_empty() {
        return Err(Error::input("empty time grid"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::input("time grid must be strictly increasing"));
    }
    let ground = enumerate_ground_states(instance)?;
    let tag = |t: f64| move |e: Error| Error::Sweep { total_time: t, source: Box::new(e) };

    let points: Vec<SweepPoint> = if schedule.kind == ScheduleKind::Vanilla {
        grid.par_iter()
            .map(|&t| {
                let spec = AnnealRunSpec {
                    instance: instance.clone(),
                    schedule: *schedule,
                    total_time: t,
                    perturbation: None,
                    integrator: config.integrator,
                };
                let run = evolve_with_stats(&spec).map_err(tag(t))?;
                let p = measure_probabilities(&run.state, &ground)?;
                Ok(SweepPoint {
                    total_time: t,
                    variance: vec![0.0; p.probabilities.len()],
                    total_mass: p.total(),
                    probabilities: p.probabilities,
                    total_mass_variance: 0.0,
                    max_norm_drift: run.stats.max_norm_drift,
                })
            })
            .collect::<Result<_>>()?
    } else {
        grid.iter()
            .map(|&t| {
                let r = run_reverse_trials_on(
                    instance,
                    &ground,
                    schedule,
                    t,
                    config.n_trials,
                    config.master_seed,
                    config.design,
                    config.integrator,
                )
                .map_err(tag(t))?;
                let totals: Vec<f64> = r.trials.iter().map(|tr| tr.result.total()).collect();
                Ok(SweepPoint {
                    total_time: t,
                    variance: r.variance(),
                    total_mass: r.average.total(),
                    total_mass_variance: sample_variance(&totals),
                    probabilities: r.average.probabilities,
                    max_norm_drift: r.trials.iter().map(|tr| tr.max_norm_drift).fold(0.0, f64::max),
                })
            })
            .collect::<Result<_>>()?
    };

    Ok(SweepResult {
        instance_label: instance.label.clone(),
        schedule: *schedule,
        ground,
        points,
        n_trials: if schedule.kind == ScheduleKind::Vanilla { 1 } else { config.n_trials },
        master_seed: config.master_seed,
        design: config.design,
        integrator: config.integrator,
    })
}

fn sample_variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
}

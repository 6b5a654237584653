//! Collecting every ground state from a black-box sampler by coupon-collector
//! rounds with a doubling estimate of the degeneracy.

use std::collections::BTreeSet;

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ising::BasisState;
use crate::rng;

/// `⌈m · ln(r·m / ε)⌉` samples per round for overall failure rate `ε` across `r` rounds.
pub fn trials_needed(m: usize, r: usize, eps: f64) -> Result<u64> {
    if m == 0 || r == 0 {
        return Err(Error::input(format!("m and r must be positive, got m={m}, r={r}")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::input(format!("failure tolerance must lie in (0, 1), got {eps}")));
    }
    let arg = (r * m) as f64 / eps;
    if arg <= 1.0 {
        return Err(Error::input("r·m/ε must exceed 1"));
    }
    Ok((m as f64 * arg.ln()).ceil() as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollectorConfig {
    pub n: usize,
    pub epsilon: f64,
    /// Multiplies every round budget; 1 assumes a perfectly uniform sampler.
    pub overhead: f64,
}

impl CollectorConfig {
    pub fn new(n: usize, epsilon: f64) -> Self {
        CollectorConfig { n, epsilon, overhead: 1.0 }
    }

    fn budget(&self, m: usize) -> Result<u64> {
        Ok((trials_needed(m, self.n, self.epsilon)? as f64 * self.overhead).ceil() as u64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundStats {
    /// Assumed degeneracy for the round.
    pub m: usize,
    /// Sample budget `T` of the round.
    pub budget: u64,
    /// Samples actually drawn in the round.
    pub samples: u64,
    /// Distinct states known when the round ended.
    pub distinct: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Collection {
    pub states: BTreeSet<BasisState>,
    pub rounds: Vec<RoundStats>,
    pub total_samples: u64,
}

/// Draws until a full round passes without the distinct count exceeding the
/// current guess `m`; each excess doubles `m` and restarts the round counter.
///
/// The loop condition is `t ≤ T`, so an uneventful round consumes `T + 1` samples.
pub fn get_ground_states<F>(config: &CollectorConfig, mut sampler: F) -> Result<Collection>
where
    F: FnMut() -> Result<BasisState>,
{
    run_rounds(config, || sampler().map(Draw::Keep))
}

/// Like [`get_ground_states`] for samplers that may return excited states:
/// only states at the lowest energy seen so far are collected, and a new
/// record low discards the collection and restarts from `m = 2`. Excited
/// samples still consume the round budget.
pub fn get_lowest_energy_states<F, E>(config: &CollectorConfig, mut sampler: F, energy: E) -> Result<Collection>
where
    F: FnMut() -> Result<BasisState>,
    E: Fn(&BasisState) -> f64,
{
    let mut best = f64::INFINITY;
    run_rounds(config, || {
        let g = sampler()?;
        let e = energy(&g);
        Ok(if e < best {
            best = e;
            Draw::NewLow(g)
        } else if e == best {
            Draw::Keep(g)
        } else {
            Draw::Skip
        })
    })
}

enum Draw {
    Keep(BasisState),
    Skip,
    NewLow(BasisState),
}

fn run_rounds<F>(config: &CollectorConfig, mut next: F) -> Result<Collection>
where
    F: FnMut() -> Result<Draw>,
{
    if config.n == 0 {
        return Err(Error::input("system size must be at least 1"));
    }
    if !(config.overhead.is_finite() && config.overhead >= 1.0) {
        return Err(Error::input(format!("overhead multiplier must be ≥ 1, got {}", config.overhead)));
    }
    let mut m = 2usize;
    let mut budget = config.budget(m)?;
    let mut states = BTreeSet::new();
    let mut rounds = Vec::new();
    let mut t = 0u64;
    let mut total = 0u64;
    while t <= budget {
        let draw = next()?;
        total += 1;
        t += 1;
        match draw {
            Draw::Skip => continue,
            Draw::NewLow(g) => {
                if !states.is_empty() {
                    rounds.push(RoundStats { m, budget, samples: t, distinct: states.len() });
                }
                states.clear();
                states.insert(check_size(config, g)?);
                m = 2;
                budget = config.budget(m)?;
                t = 1;
            }
            Draw::Keep(g) => {
                states.insert(check_size(config, g)?);
            }
        }
        if states.len() > m {
            rounds.push(RoundStats { m, budget, samples: t, distinct: states.len() });
            m *= 2;
            budget = config.budget(m)?;
            t = 0;
        }
    }
    rounds.push(RoundStats { m, budget, samples: t, distinct: states.len() });
    Ok(Collection { states, rounds, total_samples: total })
}

fn check_size(config: &CollectorConfig, g: BasisState) -> Result<BasisState> {
    if g.n() != config.n {
        return Err(Error::input(format!("sampler returned a {}-spin state for n = {}", g.n(), config.n)));
    }
    Ok(g)
}

/// Ideal sampler returning each listed state with equal probability.
#[derive(Debug, Clone)]
pub struct UniformOracle {
    states: Vec<BasisState>,
    rng: ChaCha12Rng,
}

impl UniformOracle {
    pub fn new(states: Vec<BasisState>, seed: u64) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::input("uniform oracle needs at least one state"));
        }
        Ok(UniformOracle { states, rng: rng::stream_rng(seed, 0) })
    }

    pub fn sample(&mut self) -> BasisState {
        *self.states.choose(&mut self.rng).expect("non-empty")
    }
}

/// Fraction of simulated uniform coupon collections over `m` coupons that
/// need more than `⌈m ln(m/ε)⌉` draws.
pub fn coupon_bound_monte_carlo(m: usize, eps: f64, n_runs: usize, seed: u64) -> Result<f64> {
    if m == 0 || n_runs == 0 {
        return Err(Error::input("m and n_runs must be positive"));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::input(format!("failure tolerance must lie in (0, 1), got {eps}")));
    }
    let threshold = (m as f64 * (m as f64 / eps).ln()).ceil().max(0.0) as u64;
    let failures: usize = (0..n_runs)
        .into_par_iter()
        .map(|run| {
            let mut rng = rng::stream_rng(seed, run as u64);
            let mut seen = vec![false; m];
            let (mut distinct, mut draws) = (0, 0u64);
            while distinct < m {
                let k = rng.random_range(0..m);
                draws += 1;
                if !seen[k] {
                    seen[k] = true;
                    distinct += 1;
                }
            }
            usize::from(draws > threshold)
        })
        .sum();
    Ok(failures as f64 / n_runs as f64)
}

//! Random `{±1, ±2, ±4}` spin glasses with free-spin repair.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{enumerate_ground_states, find_free_spins, SpinInstance};
use crate::error::{Error, Result};

pub const COUPLING_VALUES: [f64; 6] = [-4.0, -2.0, -1.0, 1.0, 2.0, 4.0];

/// Free-spin repair is attempted only where brute force is affordable.
const MAX_REPAIR_SPINS: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum FreeSpinStatus {
    /// Brute force found no free spins.
    Clean,
    /// Repair budget ran out (or a free spin has no incident edge); the
    /// instance still contains `remaining` free-spin occurrences.
    Flagged { remaining: usize },
    /// Too large for brute-force detection; not checked.
    Unchecked,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpinGlass {
    pub instance: SpinInstance,
    pub status: FreeSpinStatus,
    pub redraws: usize,
}

fn redraw(rng: &mut impl Rng, current: f64) -> f64 {
    let options: Vec<f64> = COUPLING_VALUES.iter().copied().filter(|&v| v != current).collect();
    *options.choose(rng).expect("five alternatives")
}

/// Draws every coupling uniformly from [`COUPLING_VALUES`], then re-draws
/// couplings next to free spins until none remain or `100·n` re-draws are spent.
pub fn generate_spinglass(n: usize, edges: &[(usize, usize)], seed: u64) -> Result<SpinGlass> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<(usize, usize, f64)> = edges
        .iter()
        .map(|&(i, j)| (i, j, *COUPLING_VALUES.choose(&mut rng).expect("nonempty")))
        .collect();
    let mut instance = SpinInstance::new(n, draws)?.labeled(format!("spinglass-n{n}-seed{seed}"));

    if n > MAX_REPAIR_SPINS {
        return Ok(SpinGlass { instance, status: FreeSpinStatus::Unchecked, redraws: 0 });
    }

    let budget = 100 * n;
    let mut redraws = 0;
    loop {
        let ground = enumerate_ground_states(&instance)?;
        let free = find_free_spins(&instance, &ground);
        if free.is_empty() {
            return Ok(SpinGlass { instance, status: FreeSpinStatus::Clean, redraws });
        }
        if redraws >= budget {
            return Ok(SpinGlass { instance, status: FreeSpinStatus::Flagged { remaining: free.len() }, redraws });
        }
        let target = free.choose(&mut rng).expect("nonempty").spin;
        let incident: Vec<usize> = instance
            .couplings()
            .iter()
            .enumerate()
            .filter(|(_, c)| c.i == target || c.j == target)
            .map(|(k, _)| k)
            .collect();
        let Some(&edge) = incident.choose(&mut rng) else {
            return Ok(SpinGlass { instance, status: FreeSpinStatus::Flagged { remaining: free.len() }, redraws });
        };
        let value = redraw(&mut rng, instance.couplings()[edge].value);
        instance.set_coupling_value(edge, value);
        redraws += 1;
    }
}

impl SpinGlass {
    pub fn into_instance(self) -> Result<SpinInstance> {
        match self.status {
            FreeSpinStatus::Flagged { remaining } => Err(Error::input(format!(
                "spin glass {} still has {remaining} free-spin occurrences",
                self.instance.label
            ))),
            _ => Ok(self.instance),
        }
    }
}

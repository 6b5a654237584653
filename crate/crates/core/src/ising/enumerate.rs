//! Exhaustive ground-state search.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{BasisState, GroundSet, SpinInstance};
use crate::error::{Error, Result};

/// Largest instance the brute-force scan accepts.
pub const MAX_ENUMERATION_SPINS: usize = 30;

/// Spins scanned by each Gray-code worker; the remaining high bits are the
/// work-partition prefix.
const CHUNK_SPINS: usize = 16;

/// Ground-set sizes beyond this are refused rather than materialized.
const MAX_GROUND_STATES: usize = 1 << 22;

/// Relative tolerance for treating two energies as degenerate.
fn degeneracy_tolerance(instance: &SpinInstance) -> f64 {
    1e-9 * instance.energy_scale().max(1.0)
}

struct Scan {
    min: f64,
    candidates: Vec<(u64, f64)>,
}

impl Scan {
    fn new() -> Self {
        Scan { min: f64::INFINITY, candidates: Vec::new() }
    }

    fn offer(&mut self, index: u64, e: f64, tol: f64) {
        if e < self.min - tol {
            self.min = e;
            self.candidates.clear();
            self.candidates.push((index, e));
        } else if e <= self.min + tol {
            self.min = self.min.min(e);
            self.candidates.push((index, e));
        }
    }

    fn merge(mut self, other: Scan, tol: f64) -> Scan {
        for (index, e) in other.candidates {
            self.offer(index, e, tol);
        }
        self
    }
}

/// Scans every state sharing the high `n - low` bits of `prefix`, walking the
/// low bits in Gray-code order with incremental energy updates.
fn scan_chunk(instance: &SpinInstance, adj: &[Vec<(usize, f64)>], prefix: u64, low: usize, tol: f64) -> Scan {
    let n = instance.n();
    let mut index = prefix;
    let mut spins: Vec<f64> = (0..n).map(|i| super::spin_value(index, n, i)).collect();
    let mut e = instance.energy_of_index(index);
    let mut scan = Scan::new();
    scan.offer(index, e, tol);
    let count: u64 = 1 << low;
    for step in 1..count {
        // bit position (from LSB) that changes between successive Gray codes
        let pos = step.trailing_zeros() as usize;
        let spin = n - 1 - pos;
        let mut field = instance.biases()[spin];
        for &(k, j) in &adj[spin] {
            field += j * spins[k];
        }
        e += 2.0 * spins[spin] * field;
        spins[spin] = -spins[spin];
        index ^= 1 << pos;
        scan.offer(index, e, tol);
    }
    scan
}

/// Exact ground set by exhaustive scan over all `2^n` states.
///
/// The scan is partitioned across threads by the high bits of the index;
/// candidate energies are recomputed directly before the final selection so
/// the result does not depend on the partitioning.
pub fn enumerate_ground_states(instance: &SpinInstance) -> Result<GroundSet> {
    let n = instance.n();
    if n > MAX_ENUMERATION_SPINS {
        return Err(Error::Resource(format!(
            "brute-force enumeration limited to {MAX_ENUMERATION_SPINS} spins, got {n}"
        )));
    }
    let tol = degeneracy_tolerance(instance);
    let adj = instance.adjacency();
    let low = n.min(CHUNK_SPINS);
    let chunks = 1u64 << (n - low);
    let scan = (0..chunks)
        .into_par_iter()
        .map(|c| scan_chunk(instance, &adj, c << low, low, tol))
        .reduce(Scan::new, |a, b| a.merge(b, tol));

    if scan.candidates.len() > MAX_GROUND_STATES {
        return Err(Error::Resource(format!(
            "ground set exceeds {MAX_GROUND_STATES} states"
        )));
    }
    let exact: Vec<(u64, f64)> = scan
        .candidates
        .iter()
        .map(|&(index, _)| (index, instance.energy_of_index(index)))
        .collect();
    let energy = exact.iter().map(|&(_, e)| e).fold(f64::INFINITY, f64::min);
    let mut states: Vec<BasisState> = exact
        .into_iter()
        .filter(|&(_, e)| e <= energy + tol)
        .map(|(index, _)| BasisState { n, index })
        .collect();
    states.sort();
    Ok(GroundSet { energy, states })
}

/// A spin whose single flip leaves a ground state's energy unchanged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FreeSpin {
    pub state: BasisState,
    pub spin: usize,
}

/// All `(ground state, spin)` pairs whose flip costs zero energy.
pub fn find_free_spins(instance: &SpinInstance, ground: &GroundSet) -> Vec<FreeSpin> {
    let tol = degeneracy_tolerance(instance);
    let adj = instance.adjacency();
    let mut free = Vec::new();
    for &state in &ground.states {
        for (spin, neighbors) in adj.iter().enumerate() {
            let mut field = instance.biases()[spin];
            for &(k, j) in neighbors {
                field += j * state.spin(k);
            }
            if (2.0 * state.spin(spin) * field).abs() <= tol {
                free.push(FreeSpin { state, spin });
            }
        }
    }
    free
}

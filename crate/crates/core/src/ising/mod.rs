//! Ising problem Hamiltonians `H_p = -Σ J_ij s_i s_j - Σ h_i s_i`.
//!
//! Bit convention, used everywhere in the crate: bit value 0 is spin +1
//! (σ_z eigenvalue +1), bit value 1 is spin −1. A basis-state index is the
//! big-endian integer value of its bit string, so spin `i` lives at bit
//! position `n - 1 - i` of the index.

mod enumerate;
mod format;
pub mod graph;
mod spinglass;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use enumerate::{enumerate_ground_states, find_free_spins, FreeSpin, MAX_ENUMERATION_SPINS};
pub use format::{parse_instance, serialize_instance};
pub use spinglass::{generate_spinglass, FreeSpinStatus, SpinGlass, COUPLING_VALUES};

/// One edge of the interaction graph, `i < j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coupling {
    pub i: usize,
    pub j: usize,
    pub value: f64,
}

/// An Ising problem instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpinInstance {
    n: usize,
    couplings: Vec<Coupling>,
    biases: Vec<f64>,
    pub label: String,
}

impl SpinInstance {
    /// Builds an instance from `(i, j, J_ij)` triples. Pairs are normalized to
    /// `i < j` and sorted; duplicates, self-loops, zero or non-finite couplings
    /// are rejected.
    pub fn new(n: usize, couplings: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        Self::with_biases(n, couplings, vec![0.0; n])
    }

    pub fn with_biases(
        n: usize,
        couplings: impl IntoIterator<Item = (usize, usize, f64)>,
        biases: Vec<f64>,
    ) -> Result<Self> {
        if n == 0 || n > 64 {
            return Err(Error::input(format!("qubit count {n} outside 1..=64")));
        }
        if biases.len() != n {
            return Err(Error::input(format!("{} biases for {n} spins", biases.len())));
        }
        if let Some(h) = biases.iter().find(|h| !h.is_finite()) {
            return Err(Error::input(format!("non-finite bias {h}")));
        }
        let mut edges = Vec::new();
        for (a, b, value) in couplings {
            let (i, j) = if a < b { (a, b) } else { (b, a) };
            if i == j {
                return Err(Error::input(format!("self-coupling on spin {i}")));
            }
            if j >= n {
                return Err(Error::input(format!("coupling ({i}, {j}) out of range for n = {n}")));
            }
            if !value.is_finite() || value == 0.0 {
                return Err(Error::input(format!("coupling ({i}, {j}) must be finite and nonzero, got {value}")));
            }
            edges.push(Coupling { i, j, value });
        }
        edges.sort_by_key(|c| (c.i, c.j));
        if let Some(w) = edges.windows(2).find(|w| (w[0].i, w[0].j) == (w[1].i, w[1].j)) {
            return Err(Error::input(format!("duplicate coupling ({}, {})", w[0].i, w[0].j)));
        }
        Ok(SpinInstance { n, couplings: edges, biases, label: String::new() })
    }

    pub fn labeled(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn couplings(&self) -> &[Coupling] {
        &self.couplings
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    pub fn is_zero_bias(&self) -> bool {
        self.biases.iter().all(|&h| h == 0.0)
    }

    /// Energy of `state`, `-Σ J_ij s_i s_j - Σ h_i s_i`.
    pub fn energy(&self, state: &BasisState) -> Result<f64> {
        if state.n() != self.n {
            return Err(Error::input(format!(
                "state has {} bits, instance has {} spins",
                state.n(),
                self.n
            )));
        }
        Ok(self.energy_of_index(state.index()))
    }

    /// Energy of the basis state with the given index; no dimension check.
    pub fn energy_of_index(&self, index: u64) -> f64 {
        let spin = |i: usize| spin_value(index, self.n, i);
        let mut e = 0.0;
        for c in &self.couplings {
            e -= c.value * spin(c.i) * spin(c.j);
        }
        for (i, &h) in self.biases.iter().enumerate() {
            if h != 0.0 {
                e -= h * spin(i);
            }
        }
        e
    }

    /// Per-spin neighbor lists `(neighbor, J)`.
    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.n];
        for c in &self.couplings {
            adj[c.i].push((c.j, c.value));
            adj[c.j].push((c.i, c.value));
        }
        adj
    }

    /// Sum of |J| and |h|, the natural energy scale for tolerances.
    pub fn energy_scale(&self) -> f64 {
        self.couplings.iter().map(|c| c.value.abs()).sum::<f64>()
            + self.biases.iter().map(|h| h.abs()).sum::<f64>()
    }

    pub(crate) fn set_coupling_value(&mut self, edge: usize, value: f64) {
        self.couplings[edge].value = value;
    }
}

/// Spin value (+1 / −1) of spin `i` in the basis state `index` of an `n`-spin system.
#[inline]
pub fn spin_value(index: u64, n: usize, i: usize) -> f64 {
    if (index >> (n - 1 - i)) & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// A computational basis state of `n` qubits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BasisState {
    n: usize,
    index: u64,
}

impl BasisState {
    pub fn new(n: usize, index: u64) -> Result<Self> {
        if n == 0 || n > 64 {
            return Err(Error::input(format!("qubit count {n} outside 1..=64")));
        }
        if n < 64 && index >> n != 0 {
            return Err(Error::input(format!("index {index} does not fit in {n} bits")));
        }
        Ok(BasisState { n, index })
    }

    /// Parses a bit string such as `"101"`; the first character is spin 0.
    pub fn from_bits(bits: &str) -> Result<Self> {
        let n = bits.len();
        if n == 0 || n > 64 {
            return Err(Error::input(format!("bit string length {n} outside 1..=64")));
        }
        let mut index = 0u64;
        for ch in bits.chars() {
            index <<= 1;
            match ch {
                '0' => {}
                '1' => index |= 1,
                other => return Err(Error::input(format!("invalid bit character {other:?}"))),
            }
        }
        Ok(BasisState { n, index })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    /// Bit value of spin `i` (0 ↔ spin +1).
    pub fn bit(&self, i: usize) -> u8 {
        ((self.index >> (self.n - 1 - i)) & 1) as u8
    }

    pub fn spin(&self, i: usize) -> f64 {
        spin_value(self.index, self.n, i)
    }

    pub fn flip(&self, i: usize) -> Self {
        BasisState { n: self.n, index: self.index ^ (1u64 << (self.n - 1 - i)) }
    }

    /// Global spin flip.
    pub fn complement(&self) -> Self {
        let mask = if self.n == 64 { u64::MAX } else { (1u64 << self.n) - 1 };
        BasisState { n: self.n, index: !self.index & mask }
    }

    pub fn hamming_distance(&self, other: &BasisState) -> u32 {
        (self.index ^ other.index).count_ones()
    }

    pub fn bits(&self) -> String {
        (0..self.n).map(|i| if self.bit(i) == 0 { '0' } else { '1' }).collect()
    }
}

impl fmt::Display for BasisState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.bits())
    }
}

/// The exact degenerate ground set of an instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundSet {
    pub energy: f64,
    /// Ascending index order.
    pub states: Vec<BasisState>,
}

impl GroundSet {
    /// Degeneracy `m`.
    pub fn m(&self) -> usize {
        self.states.len()
    }

    pub fn position(&self, state: &BasisState) -> Option<usize> {
        self.states.binary_search(state).ok()
    }

    pub fn contains(&self, state: &BasisState) -> bool {
        self.position(state).is_some()
    }

    /// Groups ground-state positions into complement pairs `{g, ḡ}` (singletons
    /// when the complement is not in the set), ordered by smallest member.
    pub fn complement_groups(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.m()];
        let mut groups = Vec::new();
        for (k, g) in self.states.iter().enumerate() {
            if seen[k] {
                continue;
            }
            seen[k] = true;
            let mut group = vec![k];
            if let Some(c) = self.position(&g.complement()) {
                if !seen[c] {
                    seen[c] = true;
                    group.push(c);
                }
            }
            groups.push(group);
        }
        groups
    }
}

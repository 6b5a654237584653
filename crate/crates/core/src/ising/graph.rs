//! Interaction graphs used to seed spin-glass instances.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub type EdgeList = Vec<(usize, usize)>;

pub fn path(n: usize) -> EdgeList {
    (1..n).map(|i| (i - 1, i)).collect()
}

pub fn ring(n: usize) -> EdgeList {
    let mut edges = path(n);
    if n > 2 {
        edges.push((0, n - 1));
    }
    edges
}

pub fn complete(n: usize) -> EdgeList {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

/// Open-boundary `rows × cols` square lattice, row-major spin order.
pub fn grid(rows: usize, cols: usize) -> EdgeList {
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let k = r * cols + c;
            if c + 1 < cols {
                edges.push((k, k + 1));
            }
            if r + 1 < rows {
                edges.push((k, k + cols));
            }
        }
    }
    edges
}

/// Uniform-ish random `degree`-regular simple graph via the pairing model
/// with rejection of self-loops and multi-edges.
pub fn random_regular(n: usize, degree: usize, seed: u64) -> Result<EdgeList> {
    if degree >= n || (n * degree) % 2 == 1 {
        return Err(Error::input(format!("no {degree}-regular graph on {n} vertices")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, degree)).collect();
    'attempt: for _ in 0..10_000 {
        stubs.shuffle(&mut rng);
        let mut edges: EdgeList = Vec::with_capacity(stubs.len() / 2);
        for pair in stubs.chunks(2) {
            let (a, b) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if a == b || edges.contains(&(a, b)) {
                continue 'attempt;
            }
            edges.push((a, b));
        }
        edges.sort();
        return Ok(edges);
    }
    Err(Error::input(format!("failed to sample a {degree}-regular graph on {n} vertices")))
}

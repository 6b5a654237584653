//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Energy of a bit string straight from `-Σ J s s - Σ h s`, bit '0' ↔ spin +1.
pub fn energy_from_bits(couplings: &[(usize, usize, f64)], biases: &[f64], bits: &str) -> f64 {
    let s: Vec<f64> = bits.chars().map(|c| if c == '0' { 1.0 } else { -1.0 }).collect();
    let mut e = 0.0;
    for &(i, j, v) in couplings {
        e -= v * s[i] * s[j];
    }
    for (i, h) in biases.iter().enumerate() {
        e -= h * s[i];
    }
    e
}

pub fn bits_of(index: u64, n: usize) -> String {
    format!("{index:0n$b}")
}

/// Ground states of a small instance by scanning all bit strings.
pub fn brute_force_ground(couplings: &[(usize, usize, f64)], biases: &[f64], n: usize) -> (f64, Vec<String>) {
    let mut best = f64::INFINITY;
    let mut states = Vec::new();
    for k in 0..(1u64 << n) {
        let b = bits_of(k, n);
        let e = energy_from_bits(couplings, biases, &b);
        if e < best - 1e-9 {
            best = e;
            states.clear();
        }
        if (e - best).abs() <= 1e-9 {
            states.push(b);
        }
    }
    (best, states)
}

fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a.kronecker(b)
}

/// `op` on qubit `i` of `n`, qubit 0 being the leftmost tensor factor.
pub fn single_site(op: &DMatrix<f64>, i: usize, n: usize) -> DMatrix<f64> {
    let id = DMatrix::<f64>::identity(2, 2);
    let mut out = DMatrix::<f64>::identity(1, 1);
    for k in 0..n {
        out = kron(&out, if k == i { op } else { &id });
    }
    out
}

pub fn sigma_x() -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])
}

pub fn sigma_z() -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0])
}

/// `d·(-Σσx) + p·H_p + z·Σ c σz` built from Kronecker products.
pub fn dense_hamiltonian(
    n: usize,
    couplings: &[(usize, usize, f64)],
    biases: &[f64],
    c: &[f64],
    (d, p, z): (f64, f64, f64),
) -> DMatrix<f64> {
    let dim = 1 << n;
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    for i in 0..n {
        h -= d * single_site(&sigma_x(), i, n);
        h -= p * biases.get(i).copied().unwrap_or(0.0) * single_site(&sigma_z(), i, n);
        if let Some(ci) = c.get(i) {
            h += z * ci * single_site(&sigma_z(), i, n);
        }
    }
    for &(i, j, v) in couplings {
        h -= p * v * (single_site(&sigma_z(), i, n) * single_site(&sigma_z(), j, n));
    }
    h
}

/// Cyclic Jacobi eigenvalues of a real symmetric matrix, ascending.
pub fn jacobi_eigen(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let mut a = a.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[(i, j)].powi(2)).sum();
        if off < 1e-26 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[(p, q)].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * a[(p, q)]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[(x, x)].total_cmp(&a[(y, y)]));
    let vals = order.iter().map(|&k| a[(k, k)]).collect();
    let vecs = DMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    (vals, vecs)
}

/// Propagates `ψ` under `-i T H(s)` with exponential-midpoint steps, each
/// exponential formed from a Jacobi eigendecomposition.
pub fn propagate_midpoint(
    psi: &[Complex64],
    total_time: f64,
    steps: usize,
    h_of_s: impl Fn(f64) -> DMatrix<f64>,
) -> Vec<Complex64> {
    let ds = 1.0 / steps as f64;
    let mut psi = psi.to_vec();
    for k in 0..steps {
        let h = h_of_s((k as f64 + 0.5) * ds);
        let (vals, vecs) = jacobi_eigen(&h);
        let dim = psi.len();
        // ψ ← V exp(-i T ds Λ) Vᵀ ψ
        let mut coeff = vec![Complex64::new(0.0, 0.0); dim];
        for j in 0..dim {
            for i in 0..dim {
                coeff[j] += vecs[(i, j)] * psi[i];
            }
            coeff[j] *= Complex64::from_polar(1.0, -total_time * ds * vals[j]);
        }
        for i in 0..dim {
            psi[i] = (0..dim).map(|j| vecs[(i, j)] * coeff[j]).sum();
        }
    }
    psi
}

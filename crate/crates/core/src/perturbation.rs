//! First-order degenerate perturbation theory inside the ground subspace of
//! `H_p`, for the transverse driver `V = -Σ σ^x` and for diagonal fields `H_z`.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::ising::{BasisState, GroundSet, SpinInstance};
use crate::quantum::{problem_diagonal, DiagonalPerturbation};
use crate::rng;

/// Components below this magnitude count as absent support.
pub const HARD_SUPPRESSION_THRESHOLD: f64 = 1e-8;
/// Lowest two first-order corrections closer than this are a degenerate split.
pub const SPLIT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Perturber {
    TransverseDriver,
    Diagonal(DiagonalPerturbation),
}

/// `W_ij = ⟨g_i|V|g_j⟩` over the ground states.
pub fn perturbation_matrix(instance: &SpinInstance, ground: &GroundSet, perturber: &Perturber) -> Result<DMatrix<f64>> {
    let m = ground.m();
    if let Some(g) = ground.states.iter().find(|g| g.n() != instance.n()) {
        return Err(Error::input(format!("ground state {g} does not match {} spins", instance.n())));
    }
    match perturber {
        Perturber::TransverseDriver => Ok(DMatrix::from_fn(m, m, |i, j| {
            if ground.states[i].hamming_distance(&ground.states[j]) == 1 {
                -1.0
            } else {
                0.0
            }
        })),
        Perturber::Diagonal(p) => {
            let mut w = DMatrix::zeros(m, m);
            for (j, g) in ground.states.iter().enumerate() {
                w[(j, j)] = hz_eigenvalue(p, g)?;
            }
            Ok(w)
        }
    }
}

/// Eigen-decomposition of `W`: first-order energy corrections and good basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoodBasisResult {
    /// Ascending.
    pub epsilons: Vec<f64>,
    /// Column `k` is `β_k`, normalized with its largest component positive.
    pub betas: DMatrix<f64>,
    /// Index of the smallest correction.
    pub k_tilde: usize,
    /// The smallest correction is not unique.
    pub degenerate_split: bool,
}

impl GoodBasisResult {
    /// The good-basis vector that the instantaneous ground state approaches.
    pub fn ground_vector(&self) -> Vec<f64> {
        self.betas.column(self.k_tilde).iter().copied().collect()
    }
}

pub fn good_basis(w: &DMatrix<f64>) -> Result<GoodBasisResult> {
    if !w.is_square() {
        return Err(Error::input(format!("W is {}x{}, not square", w.nrows(), w.ncols())));
    }
    let m = w.nrows();
    if m == 0 {
        return Err(Error::input("empty W"));
    }
    let scale = w.amax().max(1.0);
    if (w - w.transpose()).amax() > 1e-12 * scale {
        return Err(Error::input("W is not Hermitian"));
    }
    let eig = SymmetricEigen::new(w.clone());
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let epsilons: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut betas = DMatrix::zeros(m, m);
    for (col, &k) in order.iter().enumerate() {
        let mut v = eig.eigenvectors.column(k).clone_owned();
        let pivot = v.iter().copied().fold(0.0f64, |best, x| if x.abs() > best.abs() { x } else { best });
        if pivot < 0.0 {
            v = -v;
        }
        betas.set_column(col, &v);
    }
    let degenerate_split = m >= 2 && epsilons[1] - epsilons[0] < SPLIT_TOLERANCE;
    Ok(GoodBasisResult { epsilons, betas, k_tilde: 0, degenerate_split })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SuppressionLabel {
    Supported,
    HardSuppressed,
    Ambiguous,
}

/// Subspace in which the lowest first-order correction was resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sector {
    /// The whole ground subspace.
    Full,
    /// Combinations `(|g⟩ + |ḡ⟩)/√2`, invariant under the global spin flip.
    SpinFlipEven,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuppressionPrediction {
    /// Aligned with the ground set.
    pub labels: Vec<SuppressionLabel>,
    /// Weight `|β_k̃^i|²` of each ground state in the predicted late-time state.
    pub weights: Vec<f64>,
    /// Good basis of the full ground subspace.
    pub basis: GoodBasisResult,
    /// Good basis of the spin-flip-even sector, expanded back onto the ground
    /// states; present when it was used to resolve a degenerate minimum.
    pub even_sector: Option<GoodBasisResult>,
    pub sector: Sector,
}

impl SuppressionPrediction {
    pub fn hard_suppressed(&self) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == SuppressionLabel::HardSuppressed)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Columns `(e_g + e_ḡ)/√2` spanning the spin-flip-even part of the ground
/// subspace, or `None` when the ground set is not closed under complement.
fn even_sector_projector(ground: &GroundSet) -> Option<DMatrix<f64>> {
    let groups = ground.complement_groups();
    if groups.iter().any(|g| g.len() != 2) {
        return None;
    }
    let mut p = DMatrix::zeros(ground.m(), groups.len());
    for (col, group) in groups.iter().enumerate() {
        for &k in group {
            p[(k, col)] = std::f64::consts::FRAC_1_SQRT_2;
        }
    }
    Some(p)
}

/// Good basis of `W` restricted to the spin-flip-even sector, with the
/// eigenvectors expressed in ground-state coordinates (`m × m/2`).
pub fn even_sector_basis(w: &DMatrix<f64>, ground: &GroundSet) -> Result<Option<GoodBasisResult>> {
    let Some(p) = even_sector_projector(ground) else {
        return Ok(None);
    };
    let reduced = p.transpose() * w * &p;
    let mut basis = good_basis(&reduced)?;
    basis.betas = &p * &basis.betas;
    Ok(Some(basis))
}

/// Labels each ground state by whether the late-time ground state of
/// `H_p + λ(-Σσ^x)` has support on it at first order.
///
/// For zero-bias instances the driver and problem Hamiltonian commute with the
/// global spin flip and the vanilla anneal starts in the flip-even sector, so
/// a degenerate minimum of `W` in the full ground subspace is resolved inside
/// that sector before being declared ambiguous.
pub fn predict_suppression(instance: &SpinInstance, ground: &GroundSet) -> Result<SuppressionPrediction> {
    let w = perturbation_matrix(instance, ground, &Perturber::TransverseDriver)?;
    let basis = good_basis(&w)?;
    let even_sector = if basis.degenerate_split && instance.is_zero_bias() {
        even_sector_basis(&w, ground)?
    } else {
        None
    };
    let (used, sector) = match &even_sector {
        Some(even) => (even, Sector::SpinFlipEven),
        None => (&basis, Sector::Full),
    };
    let beta = used.ground_vector();
    let ambiguous = used.degenerate_split;
    let labels = beta
        .iter()
        .map(|b| {
            if ambiguous {
                SuppressionLabel::Ambiguous
            } else if b.abs() < HARD_SUPPRESSION_THRESHOLD {
                SuppressionLabel::HardSuppressed
            } else {
                SuppressionLabel::Supported
            }
        })
        .collect();
    let weights = beta.iter().map(|b| b * b).collect();
    Ok(SuppressionPrediction { labels, weights, basis, even_sector, sector })
}

/// `μ(g) = Σ_i (-1)^{g(i)} c_i`.
pub fn hz_eigenvalue(perturbation: &DiagonalPerturbation, state: &BasisState) -> Result<f64> {
    if perturbation.n() != state.n() {
        return Err(Error::input(format!(
            "{} coefficients for a {}-bit state",
            perturbation.n(),
            state.n()
        )));
    }
    Ok(perturbation
        .c
        .iter()
        .enumerate()
        .map(|(i, &c)| if state.bit(i) == 0 { c } else { -c })
        .sum())
}

/// Empirical law of `argmin_j μ(g_j)` over random `H_z` draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArgminDistribution {
    pub counts: Vec<u64>,
    pub frequencies: Vec<f64>,
    pub chi_square: f64,
    pub p_value: f64,
    /// Draws discarded because of an exact tie.
    pub ties: u64,
}

/// Chi-square goodness-of-fit statistic and upper-tail p-value against uniform.
pub fn chi_square_uniform(counts: &[u64]) -> (f64, f64) {
    let m = counts.len();
    let total: u64 = counts.iter().sum();
    if m < 2 || total == 0 {
        return (0.0, 1.0);
    }
    let expected = total as f64 / m as f64;
    let stat = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum::<f64>();
    let dist = ChiSquared::new((m - 1) as f64).expect("positive degrees of freedom");
    (stat, dist.sf(stat))
}

pub fn argmin_distribution(ground: &GroundSet, n_draws: usize, seed: u64) -> Result<ArgminDistribution> {
    let m = ground.m();
    if m == 0 {
        return Err(Error::input("empty ground set"));
    }
    if n_draws < 10 * m {
        return Err(Error::input(format!("need at least {} draws for m = {m}", 10 * m)));
    }
    let n = ground.states[0].n();
    // ±1 spin matrix so μ is a dot product
    let spins: Vec<Vec<f64>> = ground.states.iter().map(|g| (0..n).map(|i| g.spin(i)).collect()).collect();

    let (counts, ties) = (0..n_draws)
        .into_par_iter()
        .fold(
            || (vec![0u64; m], 0u64),
            |(mut counts, mut ties), d| {
                let mut rng = rng::stream_rng(seed, d as u64);
                let mut c = vec![0.0; n];
                loop {
                    for x in c.iter_mut() {
                        *x = rng.sample(StandardNormal);
                    }
                    let mut best = (f64::INFINITY, 0usize, false);
                    for (j, s) in spins.iter().enumerate() {
                        let mu: f64 = s.iter().zip(&c).map(|(a, b)| a * b).sum();
                        if mu < best.0 {
                            best = (mu, j, false);
                        } else if mu == best.0 {
                            best.2 = true;
                        }
                    }
                    if best.2 {
                        ties += 1;
                        continue;
                    }
                    counts[best.1] += 1;
                    break;
                }
                (counts, ties)
            },
        )
        .reduce(
            || (vec![0u64; m], 0u64),
            |(mut a, ta), (b, tb)| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                (a, ta + tb)
            },
        );
    let frequencies = counts.iter().map(|&c| c as f64 / n_draws as f64).collect();
    let (chi_square, p_value) = chi_square_uniform(&counts);
    Ok(ArgminDistribution { counts, frequencies, chi_square, p_value, ties })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualPoint {
    pub lambda: f64,
    /// Largest deviation of the `m` lowest exact levels from `E0 + λ ε`.
    pub residual: f64,
    /// `residual / λ²` (zero at λ = 0).
    pub ratio: f64,
}

/// Largest system for the dense transverse-driver check.
const MAX_DENSE_SPINS: usize = 10;

/// Compares exact low levels of `H_p + λV` with the first-order prediction.
pub fn first_order_energy_check(
    instance: &SpinInstance,
    ground: &GroundSet,
    perturber: &Perturber,
    lambdas: &[f64],
) -> Result<Vec<ResidualPoint>> {
    let m = ground.m();
    let w = perturbation_matrix(instance, ground, perturber)?;
    let first_order = good_basis(&w)?.epsilons;
    let problem = problem_diagonal(instance);
    let n = instance.n();
    if matches!(perturber, Perturber::TransverseDriver) && n > MAX_DENSE_SPINS {
        return Err(Error::Resource(format!("dense check limited to {MAX_DENSE_SPINS} spins")));
    }

    lambdas
        .iter()
        .map(|&lambda| {
            let mut levels: Vec<f64> = match perturber {
                Perturber::Diagonal(p) => {
                    let hz = p.diagonal();
                    problem.iter().zip(&hz).map(|(a, b)| a + lambda * b).collect()
                }
                Perturber::TransverseDriver => {
                    let dim = 1usize << n;
                    let mut h = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(problem.clone()));
                    for k in 0..dim {
                        for i in 0..n {
                            h[(k ^ (1 << i), k)] -= lambda;
                        }
                    }
                    SymmetricEigen::new(h).eigenvalues.iter().copied().collect()
                }
            };
            levels.sort_by(f64::total_cmp);
            let residual = levels
                .iter()
                .take(m)
                .zip(&first_order)
                .map(|(exact, eps)| (exact - (ground.energy + lambda * eps)).abs())
                .fold(0.0, f64::max);
            let ratio = if lambda == 0.0 { 0.0 } else { residual / (lambda * lambda) };
            Ok(ResidualPoint { lambda, residual, ratio })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ising::enumerate_ground_states;

    fn states(bits: &[&str]) -> GroundSet {
        GroundSet { energy: 0.0, states: bits.iter().map(|b| BasisState::from_bits(b).unwrap()).collect() }
    }

    fn fm2() -> SpinInstance {
        SpinInstance::new(2, [(0, 1, 1.0)]).unwrap()
    }

    #[test]
    fn diagonal_w_holds_mu() {
        let p = DiagonalPerturbation { c: vec![0.5, -0.3], seed: 0 };
        let g = states(&["00", "11"]);
        let w = perturbation_matrix(&fm2(), &g, &Perturber::Diagonal(p)).unwrap();
        assert_eq!(w, DMatrix::from_row_slice(2, 2, &[0.2, 0.0, 0.0, -0.2]));
    }

    #[test]
    fn transverse_w_connects_single_flips_only() {
        let w = perturbation_matrix(&fm2(), &states(&["00", "11"]), &Perturber::TransverseDriver).unwrap();
        assert_eq!(w, DMatrix::zeros(2, 2));
        let w = perturbation_matrix(&fm2(), &states(&["00", "01"]), &Perturber::TransverseDriver).unwrap();
        assert_eq!(w, DMatrix::from_row_slice(2, 2, &[0.0, -1.0, -1.0, 0.0]));
    }

    #[test]
    fn good_basis_of_diagonal() {
        let w = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, 1.0, 2.0]));
        let b = good_basis(&w).unwrap();
        assert_eq!(b.epsilons, vec![1.0, 2.0, 3.0]);
        assert_eq!(b.ground_vector(), vec![0.0, 1.0, 0.0]);
        assert!(!b.degenerate_split);
    }

    #[test]
    fn zero_w_is_degenerate() {
        assert!(good_basis(&DMatrix::zeros(2, 2)).unwrap().degenerate_split);
    }

    #[test]
    fn non_hermitian_rejected() {
        let w = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(good_basis(&w), Err(Error::Input(_))));
    }

    #[test]
    fn single_flip_pair_is_fully_supported() {
        let pred = predict_suppression(&fm2(), &states(&["00", "01"])).unwrap();
        assert_eq!(pred.labels, vec![SuppressionLabel::Supported; 2]);
        assert!(pred.weights.iter().all(|w| (w - 0.5).abs() < 1e-12));
    }

    #[test]
    fn disconnected_pair_resolves_in_even_sector() {
        let g = enumerate_ground_states(&fm2()).unwrap();
        let pred = predict_suppression(&fm2(), &g).unwrap();
        assert!(pred.basis.degenerate_split);
        assert_eq!(pred.sector, Sector::SpinFlipEven);
        assert_eq!(pred.labels, vec![SuppressionLabel::Supported; 2]);
    }

    #[test]
    fn degenerate_without_symmetry_is_ambiguous() {
        // biased instance: no flip symmetry to lean on
        let inst = SpinInstance::with_biases(2, [(0, 1, 1.0)], vec![0.5, 0.0]).unwrap();
        let pred = predict_suppression(&inst, &states(&["00", "11"])).unwrap();
        assert_eq!(pred.sector, Sector::Full);
        assert_eq!(pred.labels, vec![SuppressionLabel::Ambiguous; 2]);
    }

    #[test]
    fn isolated_pair_is_hard_suppressed() {
        // {00000, 00001} and its complement are flip-connected pairs with equal
        // first-order shifts; {01010, 10101} is unreachable by single flips
        let g = states(&["00000", "00001", "01010", "10101", "11110", "11111"]);
        let inst = SpinInstance::new(5, [(0, 1, 1.0)]).unwrap();
        let pred = predict_suppression(&inst, &g).unwrap();
        assert!(pred.basis.degenerate_split);
        assert_eq!(pred.sector, Sector::SpinFlipEven);
        let even = pred.even_sector.as_ref().unwrap();
        assert!(!even.degenerate_split);
        assert!((even.epsilons[0] + 1.0).abs() < 1e-12);
        assert_eq!(pred.hard_suppressed(), vec![2, 3]);
        for k in [0, 1, 4, 5] {
            assert!((pred.weights[k] - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn mu_examples() {
        let p = DiagonalPerturbation { c: vec![0.5, -0.3, 0.1], seed: 0 };
        let mu = |b: &str| hz_eigenvalue(&p, &BasisState::from_bits(b).unwrap()).unwrap();
        assert!((mu("000") - 0.3).abs() < 1e-15);
        assert!((mu("101") + 0.9).abs() < 1e-15);
        assert!((mu("011") + mu("100")).abs() < 1e-15);
        assert!(hz_eigenvalue(&p, &BasisState::from_bits("00").unwrap()).is_err());
    }

    #[test]
    fn argmin_single_state() {
        let d = argmin_distribution(&states(&["01"]), 100, 3).unwrap();
        assert_eq!(d.frequencies, vec![1.0]);
        assert!(argmin_distribution(&states(&["00", "11"]), 19, 3).is_err());
    }

    #[test]
    fn argmin_complement_pair_is_even() {
        let n = 100_000;
        let d = argmin_distribution(&states(&["00", "11"]), n, 17).unwrap();
        let sigma = (0.25 / n as f64).sqrt();
        assert!((d.frequencies[0] - 0.5).abs() < 3.0 * sigma, "{:?}", d.frequencies);
        assert_eq!(d.ties, 0);
        assert_eq!(d, argmin_distribution(&states(&["00", "11"]), n, 17).unwrap());
    }

    #[test]
    fn diagonal_first_order_is_exact() {
        let inst = SpinInstance::new(3, [(0, 1, -1.0), (0, 2, -1.0), (1, 2, -1.0)]).unwrap();
        let g = enumerate_ground_states(&inst).unwrap();
        let p = Perturber::Diagonal(DiagonalPerturbation::draw(3, 4));
        for r in first_order_energy_check(&inst, &g, &p, &[0.0, 1e-3, 1e-2, 1e-1]).unwrap() {
            assert!(r.residual < 1e-12, "{r:?}");
        }
    }

    #[test]
    fn transverse_residual_scales_quadratically() {
        let inst = SpinInstance::new(3, [(0, 1, -1.0), (0, 2, -1.0), (1, 2, -1.0)]).unwrap();
        let g = enumerate_ground_states(&inst).unwrap();
        let pts = first_order_energy_check(&inst, &g, &Perturber::TransverseDriver, &[0.0, 1e-2, 1e-3]).unwrap();
        assert_eq!(pts[0].residual, 0.0);
        assert!(pts[1].ratio > 0.0);
        let (a, b) = (pts[1].ratio, pts[2].ratio);
        assert!(a / b < 1.5 && b / a < 1.5, "{a} {b}");
    }
}

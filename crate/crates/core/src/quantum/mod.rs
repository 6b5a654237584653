//! Closed-system simulation of `H(s) = A·D(s)·H_d + P(s)·H_p + Z(s)·H_z`
//! with `H_d = -Σ σ^x_i`, `H_z = Σ c_i σ^z_i`, and `s = t/T` (ħ = 1).

pub mod integrator;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::ising::{enumerate_ground_states, BasisState, GroundSet, SpinInstance};
use crate::rng;
use crate::schedule::AnnealSchedule;
use integrator::{integrate, StepControl, StepStats};

/// Largest qubit count accepted by the state-vector simulator.
pub const MAX_QUANTUM_SPINS: usize = 12;

/// Accepted integrations keep `| ‖ψ‖ − 1 |` below this.
pub const NORM_LIMIT: f64 = 1e-6;

/// Random longitudinal field `H_z = Σ c_i σ^z_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagonalPerturbation {
    pub c: Vec<f64>,
    pub seed: u64,
}

impl DiagonalPerturbation {
    /// Draws `c_i ~ N(0, 1)` i.i.d.; an exact zero is re-drawn.
    pub fn draw(n: usize, seed: u64) -> Self {
        let mut rng = rng::stream_rng(seed, 0);
        let c = (0..n)
            .map(|_| loop {
                let x: f64 = rng.sample(StandardNormal);
                if x != 0.0 {
                    break x;
                }
            })
            .collect();
        DiagonalPerturbation { c, seed }
    }

    /// Perturbation for reverse trial `trial` under `master_seed`.
    pub fn for_trial(n: usize, master_seed: u64, trial: usize) -> Self {
        Self::draw(n, rng::derive_seed(master_seed, trial as u64))
    }

    pub fn n(&self) -> usize {
        self.c.len()
    }

    /// The mirrored field `-c`, keeping the seed it was drawn from.
    pub fn negated(&self) -> Self {
        DiagonalPerturbation { c: self.c.iter().map(|c| -c).collect(), seed: self.seed }
    }

    /// Diagonal of `H_z` assembled term by term from `c_i σ^z_i`.
    pub fn diagonal(&self) -> Vec<f64> {
        let n = self.n();
        let mut diag = vec![0.0; 1 << n];
        for (i, &ci) in self.c.iter().enumerate() {
            let block = 1usize << (n - 1 - i);
            // σ^z_i is +1 on the first half of every 2·block stripe, −1 on the second
            for (k, d) in diag.iter_mut().enumerate() {
                *d += if k & block == 0 { ci } else { -ci };
            }
        }
        diag
    }
}

/// Ground state of `H_z`: bit `i` is 1 exactly when `c_i > 0`.
pub fn hz_ground_state(perturbation: &DiagonalPerturbation) -> Result<BasisState> {
    let n = perturbation.n();
    if let Some(i) = perturbation.c.iter().position(|&c| c == 0.0 || !c.is_finite()) {
        return Err(Error::input(format!("c[{i}] = {} has no sign; re-draw the perturbation", perturbation.c[i])));
    }
    let index = perturbation.c.iter().fold(0u64, |acc, &c| (acc << 1) | u64::from(c > 0.0));
    BasisState::new(n, index)
}

/// Problem-Hamiltonian diagonal built from `-J σ^z_i σ^z_j` and `-h σ^z_i` terms.
pub fn problem_diagonal(instance: &SpinInstance) -> Vec<f64> {
    let n = instance.n();
    let z = |k: usize, i: usize| if k >> (n - 1 - i) & 1 == 0 { 1.0 } else { -1.0 };
    let mut diag = vec![0.0; 1 << n];
    for c in instance.couplings() {
        for (k, d) in diag.iter_mut().enumerate() {
            *d -= c.value * z(k, c.i) * z(k, c.j);
        }
    }
    for (i, &h) in instance.biases().iter().enumerate() {
        if h != 0.0 {
            for (k, d) in diag.iter_mut().enumerate() {
                *d -= h * z(k, i);
            }
        }
    }
    diag
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorSettings {
    /// Local error tolerance per step.
    pub tolerance: f64,
    /// Largest step in physical time `t`.
    pub max_step: f64,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        IntegratorSettings { tolerance: 1e-11, max_step: 1.0 }
    }
}

/// One closed-system anneal.
#[derive(Debug, Clone)]
pub struct AnnealRunSpec {
    pub instance: SpinInstance,
    pub schedule: AnnealSchedule,
    pub total_time: f64,
    pub perturbation: Option<DiagonalPerturbation>,
    pub integrator: IntegratorSettings,
}

impl AnnealRunSpec {
    pub fn validate(&self) -> Result<()> {
        let n = self.instance.n();
        if n > MAX_QUANTUM_SPINS {
            return Err(Error::Resource(format!(
                "state-vector simulation limited to {MAX_QUANTUM_SPINS} qubits, got {n}"
            )));
        }
        if !(self.total_time.is_finite() && self.total_time > 0.0) {
            return Err(Error::input(format!("total time must be positive, got {}", self.total_time)));
        }
        let tol = self.integrator.tolerance;
        if !(tol > 0.0 && tol <= 1e-4) {
            return Err(Error::input(format!("integrator tolerance {tol} outside (0, 1e-4]")));
        }
        if self.integrator.max_step.is_nan() || self.integrator.max_step <= 0.0 {
            return Err(Error::input("max step must be positive"));
        }
        match (&self.perturbation, self.schedule.kind.is_reverse()) {
            (Some(p), true) if p.n() != n => {
                Err(Error::input(format!("perturbation has {} coefficients for {n} qubits", p.n())))
            }
            (Some(_), true) | (None, false) => Ok(()),
            (None, true) => Err(Error::input(format!("{} schedule needs a diagonal perturbation", self.schedule.kind))),
            (Some(_), false) => Err(Error::input("vanilla schedule takes no diagonal perturbation")),
        }
    }
}

/// `H(s)` in sparse form: a diagonal plus `transverse · (-Σ σ^x_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseHamiltonian {
    n: usize,
    pub transverse: f64,
    pub diagonal: Vec<f64>,
}

impl SparseHamiltonian {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    /// `out = H ψ`.
    pub fn apply(&self, psi: &[Complex64], out: &mut [Complex64]) {
        apply_split(self.n, self.transverse, |k| self.diagonal[k], psi, out);
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let dim = self.dim();
        let mut m = DMatrix::zeros(dim, dim);
        for k in 0..dim {
            m[(k, k)] = self.diagonal[k];
            for i in 0..self.n {
                m[(k ^ (1 << i), k)] -= self.transverse;
            }
        }
        m
    }
}

#[inline]
fn apply_split(n: usize, transverse: f64, diag: impl Fn(usize) -> f64, psi: &[Complex64], out: &mut [Complex64]) {
    for (k, o) in out.iter_mut().enumerate() {
        let mut flips = Complex64::new(0.0, 0.0);
        for i in 0..n {
            flips += psi[k ^ (1 << i)];
        }
        *o = psi[k] * diag(k) - flips * transverse;
    }
}

/// Precomputed diagonals for one run spec.
struct Terms {
    n: usize,
    schedule: AnnealSchedule,
    problem: Vec<f64>,
    perturbation: Option<Vec<f64>>,
}

impl Terms {
    fn new(spec: &AnnealRunSpec) -> Self {
        Terms {
            n: spec.instance.n(),
            schedule: spec.schedule,
            problem: problem_diagonal(&spec.instance),
            perturbation: spec.perturbation.as_ref().map(DiagonalPerturbation::diagonal),
        }
    }

    fn at(&self, s: f64) -> SparseHamiltonian {
        let c = self.schedule.evaluate_unchecked(s);
        let diagonal = match &self.perturbation {
            Some(hz) => self.problem.iter().zip(hz).map(|(&p, &z)| c.p * p + c.z * z).collect(),
            None => self.problem.iter().map(|&p| c.p * p).collect(),
        };
        SparseHamiltonian { n: self.n, transverse: c.d, diagonal }
    }

    /// `out = -i T H(s) ψ` without materializing the diagonal.
    fn rhs(&self, total_time: f64, s: f64, psi: &[Complex64], out: &mut [Complex64]) {
        let c = self.schedule.evaluate_unchecked(s.clamp(0.0, 1.0));
        match &self.perturbation {
            Some(hz) => apply_split(self.n, c.d, |k| c.p * self.problem[k] + c.z * hz[k], psi, out),
            None => apply_split(self.n, c.d, |k| c.p * self.problem[k], psi, out),
        }
        let scale = Complex64::new(0.0, -total_time);
        for o in out.iter_mut() {
            *o *= scale;
        }
    }
}

/// `H(s)` for the given run.
pub fn build_hamiltonian(spec: &AnnealRunSpec, s: f64) -> Result<SparseHamiltonian> {
    spec.validate()?;
    spec.schedule.evaluate(s)?;
    Ok(Terms::new(spec).at(s))
}

/// Normalized amplitude vector over the `2^n` computational basis.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    pub amplitudes: Vec<Complex64>,
}

impl QuantumState {
    pub fn uniform(n: usize) -> Self {
        let dim = 1usize << n;
        let a = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
        QuantumState { amplitudes: vec![a; dim] }
    }

    pub fn basis(state: BasisState) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << state.n()];
        amplitudes[state.index() as usize] = Complex64::new(1.0, 0.0);
        QuantumState { amplitudes }
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &QuantumState) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            .norm_sqr()
    }
}

/// Initial state of a run: uniform superposition for vanilla, the `H_z`
/// ground state for reverse paths.
pub fn initial_state(spec: &AnnealRunSpec) -> Result<QuantumState> {
    match &spec.perturbation {
        Some(p) => Ok(QuantumState::basis(hz_ground_state(p)?)),
        None => Ok(QuantumState::uniform(spec.instance.n())),
    }
}

#[derive(Debug, Clone)]
pub struct Evolution {
    pub state: QuantumState,
    pub stats: StepStats,
}

/// Solves `i dψ/dt = H(t/T) ψ` on `[0, T]`, stepping in `s = t/T`.
pub fn evolve(spec: &AnnealRunSpec) -> Result<QuantumState> {
    evolve_with_stats(spec).map(|e| e.state)
}

pub fn evolve_with_stats(spec: &AnnealRunSpec) -> Result<Evolution> {
    spec.validate()?;
    let terms = Terms::new(spec);
    let mut psi = initial_state(spec)?.amplitudes;
    let t = spec.total_time;
    let control = StepControl {
        tolerance: spec.integrator.tolerance,
        max_step: (spec.integrator.max_step / t).min(1.0),
        norm_limit: NORM_LIMIT,
    };
    // rough spectral radius for the first step guess
    let radius = spec.instance.energy_scale() + spec.schedule.driver_amplitude * spec.instance.n() as f64 + spec
        .perturbation
        .as_ref()
        .map_or(0.0, |p| p.c.iter().map(|c| c.abs()).sum());
    let first = 0.01 / (t * radius.max(1.0));
    let stats = integrate(|s, y, out| terms.rhs(t, s, y, out), &mut psi, 0.0, 1.0, first, control)?;
    Ok(Evolution { state: QuantumState { amplitudes: psi }, stats })
}

/// Probabilities of each ground state plus the mass outside the ground set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundProbabilities {
    /// Aligned with `GroundSet::states`.
    pub probabilities: Vec<f64>,
    pub rest: f64,
}

impl GroundProbabilities {
    pub fn total(&self) -> f64 {
        self.probabilities.iter().sum()
    }
}

pub fn measure_probabilities(state: &QuantumState, ground: &GroundSet) -> Result<GroundProbabilities> {
    let dim = state.amplitudes.len();
    if let Some(g) = ground.states.first() {
        if dim != 1usize << g.n() {
            return Err(Error::input(format!("state dimension {dim} does not match {}-qubit ground set", g.n())));
        }
    }
    let probabilities: Vec<f64> =
        ground.states.iter().map(|g| state.amplitudes[g.index() as usize].norm_sqr()).collect();
    let rest = 1.0 - probabilities.iter().sum::<f64>();
    Ok(GroundProbabilities { probabilities, rest })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReverseTrial {
    pub trial: usize,
    pub perturbation: DiagonalPerturbation,
    pub result: GroundProbabilities,
    pub max_norm_drift: f64,
}

/// How the random fields of successive trials relate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrialDesign {
    /// Every trial draws a fresh `c`.
    Independent,
    /// Trials come in pairs `(c, -c)`; an odd final trial is unpaired.
    Antithetic,
    /// Antithetic pairs whose base fields are Gaussian images of an
    /// Owen-scrambled Sobol sequence, so the directions of `c` are spread
    /// more evenly than i.i.d. draws at small trial counts.
    #[default]
    Stratified,
}

/// Most pairs a stratified design can address.
pub const MAX_STRATIFIED_PAIRS: usize = 1 << 16;

fn stratified_field(n: usize, master_seed: u64, pair: usize) -> DiagonalPerturbation {
    let seed = rng::derive_seed(master_seed, u64::MAX) as u32;
    let c = (0..n)
        .map(|i| {
            // shift off the lattice so that u ∈ (0, 1)
            let u = f64::from(sobol_burley::sample(pair as u32, i as u32, seed)) + 0.5f64.powi(25);
            let x = std_normal_quantile(u);
            if x == 0.0 { f64::EPSILON } else { x }
        })
        .collect();
    DiagonalPerturbation { c, seed: u64::from(seed) }
}

fn std_normal_quantile(u: f64) -> f64 {
    Normal::standard().inverse_cdf(u)
}

impl TrialDesign {
    /// Perturbation used by `trial`.
    pub fn perturbation(self, n: usize, master_seed: u64, trial: usize) -> DiagonalPerturbation {
        match self {
            TrialDesign::Independent => DiagonalPerturbation::for_trial(n, master_seed, trial),
            TrialDesign::Antithetic | TrialDesign::Stratified => {
                let base = if self == TrialDesign::Antithetic {
                    DiagonalPerturbation::for_trial(n, master_seed, trial / 2)
                } else {
                    stratified_field(n, master_seed, trial / 2)
                };
                if trial.is_multiple_of(2) { base } else { base.negated() }
            }
        }
    }
}

impl std::str::FromStr for TrialDesign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "independent" => Ok(TrialDesign::Independent),
            "antithetic" => Ok(TrialDesign::Antithetic),
            "stratified" => Ok(TrialDesign::Stratified),
            other => Err(Error::input(format!("unknown trial design '{other}' (expected independent|antithetic|stratified)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReverseTrials {
    pub ground: GroundSet,
    pub average: GroundProbabilities,
    pub trials: Vec<ReverseTrial>,
    pub master_seed: u64,
    pub design: TrialDesign,
}

impl ReverseTrials {
    /// Per-state sample variance across trials (zero for a single trial).
    pub fn variance(&self) -> Vec<f64> {
        let k = self.trials.len();
        if k < 2 {
            return vec![0.0; self.average.probabilities.len()];
        }
        (0..self.average.probabilities.len())
            .map(|g| {
                let mean = self.average.probabilities[g];
                self.trials.iter().map(|t| (t.result.probabilities[g] - mean).powi(2)).sum::<f64>() / (k - 1) as f64
            })
            .collect()
    }
}

/// Runs `n_trials` reverse anneals, each with its own random `H_z`, and
/// averages the ground-state probabilities in trial order.
pub fn run_reverse_trials(
    instance: &SpinInstance,
    schedule: &AnnealSchedule,
    total_time: f64,
    n_trials: usize,
    master_seed: u64,
    design: TrialDesign,
    integrator: IntegratorSettings,
) -> Result<ReverseTrials> {
    let ground = enumerate_ground_states(instance)?;
    run_reverse_trials_on(instance, &ground, schedule, total_time, n_trials, master_seed, design, integrator)
}

#[allow(clippy::too_many_arguments)]
pub fn run_reverse_trials_on(
    instance: &SpinInstance,
    ground: &GroundSet,
    schedule: &AnnealSchedule,
    total_time: f64,
    n_trials: usize,
    master_seed: u64,
    design: TrialDesign,
    integrator: IntegratorSettings,
) -> Result<ReverseTrials> {
    if !schedule.kind.is_reverse() {
        return Err(Error::input(format!("{} is not a reverse schedule", schedule.kind)));
    }
    if n_trials == 0 {
        return Err(Error::input("need at least one trial"));
    }
    if design == TrialDesign::Stratified && n_trials.div_ceil(2) > MAX_STRATIFIED_PAIRS {
        return Err(Error::input(format!("stratified design supports at most {MAX_STRATIFIED_PAIRS} pairs")));
    }
    let trials: Vec<ReverseTrial> = (0..n_trials)
        .into_par_iter()
        .map(|trial| {
            let perturbation = design.perturbation(instance.n(), master_seed, trial);
            let spec = AnnealRunSpec {
                instance: instance.clone(),
                schedule: *schedule,
                total_time,
                perturbation: Some(perturbation.clone()),
                integrator,
            };
            let evolution = evolve_with_stats(&spec).map_err(|e| Error::Trial { trial, source: Box::new(e) })?;
            Ok(ReverseTrial {
                trial,
                perturbation,
                result: measure_probabilities(&evolution.state, ground)?,
                max_norm_drift: evolution.stats.max_norm_drift,
            })
        })
        .collect::<Result<_>>()?;

    let m = ground.m();
    let mut sum = vec![0.0; m];
    let mut rest = 0.0;
    for t in &trials {
        for (acc, p) in sum.iter_mut().zip(&t.result.probabilities) {
            *acc += p;
        }
        rest += t.result.rest;
    }
    let k = n_trials as f64;
    let average = GroundProbabilities { probabilities: sum.into_iter().map(|p| p / k).collect(), rest: rest / k };
    Ok(ReverseTrials { ground: ground.clone(), average, trials, master_seed, design })
}

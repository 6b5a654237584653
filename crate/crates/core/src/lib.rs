//! Simulation laboratory for fair sampling of degenerate Ising ground states
//! under transverse-field and reverse-style quantum annealing, with the
//! perturbative predictor, classical baselines, and a ground-set collector.

pub mod classical;
pub mod collector;
pub mod error;
pub mod harness;
pub mod models;
pub mod ising;
pub mod perturbation;
pub mod quantum;
pub mod rng;
pub mod schedule;

pub use error::{Error, Result};

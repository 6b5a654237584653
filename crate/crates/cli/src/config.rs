//! Optional TOML file supplying defaults for any command-line flag.

use std::path::{Path, PathBuf};

use serde::Deserialize;

/// Every key a config file may set; names match the long flags.
#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct FileConfig {
    pub instance: Option<String>,
    pub schedule: Option<String>,
    pub driver_amplitude: Option<f64>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<String>,
    pub design: Option<String>,
    pub t_min: Option<f64>,
    pub t_max: Option<f64>,
    pub points: Option<usize>,
    pub tolerance: Option<f64>,
    pub anneal_time: Option<f64>,
    pub blocks: Option<usize>,
    pub block_size: Option<usize>,
    pub samplers: Option<Vec<String>>,
    pub sa_sweeps: Option<usize>,
    pub pt_sweeps: Option<usize>,
    pub sampler: Option<String>,
    pub epsilon: Option<f64>,
    pub overhead: Option<f64>,
    pub n: Option<usize>,
    pub graph: Option<String>,
    pub degree: Option<usize>,
    pub rows: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }
}

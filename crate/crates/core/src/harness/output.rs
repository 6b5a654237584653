//! CSV and JSON result files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{SamplerComparison, SweepResult};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::input(format!("unknown format '{other}' (expected csv|json)"))),
        }
    }
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |source| Error::Io { path: path.to_path_buf(), source }
}

fn ser_err(e: impl std::fmt::Display) -> Error {
    Error::Serialize(e.to_string())
}

fn write_json<T: Serialize, W: Write>(value: &T, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value).map_err(ser_err)?;
    writeln!(out).map_err(ser_err)?;
    out.flush().map_err(ser_err)
}

/// Opens `path` for writing and runs `body`, attributing I/O failures to the path.
fn to_file(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path).map_err(io_err(path))?);
    body(&mut out).map_err(|e| match e {
        Error::Serialize(msg) => Error::Io { path: path.to_path_buf(), source: std::io::Error::other(msg) },
        other => other,
    })?;
    out.flush().map_err(io_err(path))
}

/// Writes sweep results.
///
/// CSV has columns `schedule,T,state_bits,probability,variance,n_trials`
/// with, per time point, one row per ground state followed by a `total`
/// row. JSON holds the complete objects, seeds included.
pub fn emit_results(results: &[SweepResult], format: OutputFormat, path: &Path) -> Result<()> {
    to_file(path, |out| write_results(results, format, out))
}

pub fn write_results<W: Write>(results: &[SweepResult], format: OutputFormat, out: W) -> Result<()> {
    match format {
        OutputFormat::Json => write_json(&results, out),
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["schedule", "T", "state_bits", "probability", "variance", "n_trials"]).map_err(ser_err)?;
            for r in results {
                let schedule = r.schedule.kind.name();
                let trials = r.n_trials.to_string();
                for p in &r.points {
                    let t = p.total_time.to_string();
                    for (g, state) in r.ground.states.iter().enumerate() {
                        w.write_record([
                            schedule,
                            &t,
                            &state.bits(),
                            &p.probabilities[g].to_string(),
                            &p.variance[g].to_string(),
                            &trials,
                        ])
                        .map_err(ser_err)?;
                    }
                    w.write_record([schedule, &t, "total", &p.total_mass.to_string(), &p.total_mass_variance.to_string(), &trials])
                        .map_err(ser_err)?;
                }
            }
            w.flush().map_err(ser_err)
        }
    }
}

pub fn read_results_json(path: &Path) -> Result<Vec<SweepResult>> {
    let file = File::open(path).map_err(io_err(path))?;
    serde_json::from_reader(std::io::BufReader::new(file)).map_err(|e| Error::Serialize(e.to_string()))
}

/// CSV columns `sampler,state_bits,normed_mean,normed_std_err,log_normed,log_std_err,floored`.
pub fn emit_comparison(comparison: &SamplerComparison, format: OutputFormat, path: &Path) -> Result<()> {
    to_file(path, |out| write_comparison(comparison, format, out))
}

pub fn write_comparison<W: Write>(comparison: &SamplerComparison, format: OutputFormat, out: W) -> Result<()> {
    match format {
        OutputFormat::Json => write_json(comparison, out),
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["sampler", "state_bits", "normed_mean", "normed_std_err", "log_normed", "log_std_err", "floored"])
                .map_err(ser_err)?;
            for col in &comparison.columns {
                for (g, state) in comparison.ground.states.iter().enumerate() {
                    w.write_record([
                        col.label.as_str(),
                        &state.bits(),
                        &col.normed_mean[g].to_string(),
                        &col.normed_std_err[g].to_string(),
                        &col.log_normed[g].to_string(),
                        &col.log_std_err[g].to_string(),
                        &col.floored[g].to_string(),
                    ])
                    .map_err(ser_err)?;
                }
            }
            w.flush().map_err(ser_err)
        }
    }
}

/// Pretty JSON for any serializable result.
pub fn write_json_value<T: Serialize, W: Write>(value: &T, out: W) -> Result<()> {
    write_json(value, out)
}

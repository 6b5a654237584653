//! `fairqa`: sweeps, sampler comparisons, ground-state collection,
//! suppression prediction and instance generation.

mod config;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use serde::Serialize;

use config::FileConfig;
use fairqa::classical::{pt_icm, simulated_annealing, BetaLadder, PtIcmConfig};
use fairqa::collector::{get_lowest_energy_states, CollectorConfig, UniformOracle};
use fairqa::harness::{
    compare_samplers, log_time_grid, sweep_anneal_time, write_comparison, write_json_value, write_results, OutputFormat,
    SamplerSpec, SweepConfig,
};
use fairqa::ising::{enumerate_ground_states, graph, generate_spinglass, parse_instance, serialize_instance, BasisState, SpinInstance};
use fairqa::perturbation::{predict_suppression, Sector, SuppressionLabel};
use fairqa::quantum::{evolve, AnnealRunSpec, IntegratorSettings, TrialDesign};
use fairqa::schedule::{AnnealSchedule, ScheduleKind};
use fairqa::{models, rng};

#[derive(Parser)]
#[command(name = "fairqa", version, about = "Fair ground-state sampling experiments")]
struct Cli {
    /// TOML file giving defaults for any flag; flags on the command line win
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ground-state probabilities versus total anneal time
    Sweep(SweepArgs),
    /// Block-averaged ground-state counts of several samplers
    Compare(CompareArgs),
    /// Collect every ground state with a doubling coupon-collector loop
    Collect(CollectArgs),
    /// First-order suppression prediction for the vanilla anneal
    Predict(CommonArgs),
    /// Random spin glass with couplings from {±1, ±2, ±4}
    GenInstance(GenArgs),
}

#[derive(Args, Clone, Default)]
struct CommonArgs {
    /// Instance file, or `builtin:<name>` (a, b, c, d, two-triangles)
    #[arg(long)]
    instance: Option<String>,
    /// vanilla | quadratic | piecewise
    #[arg(long)]
    schedule: Option<String>,
    #[arg(long)]
    driver_amplitude: Option<f64>,
    /// Reverse trials per anneal time
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; standard output when absent
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv | json
    #[arg(long)]
    format: Option<String>,
}

#[derive(Args, Clone, Default)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// independent | antithetic | stratified
    #[arg(long)]
    design: Option<String>,
    #[arg(long)]
    t_min: Option<f64>,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    /// Integrator local error tolerance
    #[arg(long)]
    tolerance: Option<f64>,
}

#[derive(Args, Clone, Default)]
struct CompareArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    anneal_time: Option<f64>,
    #[arg(long)]
    blocks: Option<usize>,
    #[arg(long)]
    block_size: Option<usize>,
    /// Comma-separated: reverse, vanilla, sa, pt-icm, uniform-oracle
    #[arg(long, value_delimiter = ',')]
    samplers: Option<Vec<String>>,
    #[arg(long)]
    sa_sweeps: Option<usize>,
    #[arg(long)]
    pt_sweeps: Option<usize>,
    #[arg(long)]
    design: Option<String>,
}

#[derive(Args, Clone, Default)]
struct CollectArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// quantum-sim | sa | pt-icm | uniform-oracle
    #[arg(long)]
    sampler: Option<String>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Multiplier on every round budget
    #[arg(long)]
    overhead: Option<f64>,
    #[arg(long)]
    anneal_time: Option<f64>,
    #[arg(long)]
    sa_sweeps: Option<usize>,
    #[arg(long)]
    pt_sweeps: Option<usize>,
}

#[derive(Args, Clone, Default)]
struct GenArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Number of spins
    #[arg(long)]
    n: Option<usize>,
    /// ring | path | complete | grid | regular
    #[arg(long)]
    graph: Option<String>,
    /// Degree for `regular`
    #[arg(long)]
    degree: Option<usize>,
    /// Rows for `grid` (columns = n / rows)
    #[arg(long)]
    rows: Option<usize>,
}

enum Failure {
    Input(String),
    Numerical(String),
}

impl From<fairqa::Error> for Failure {
    fn from(e: fairqa::Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

type Outcome<T> = Result<T, Failure>;

fn input<T>(msg: impl Into<String>) -> Outcome<T> {
    Err(Failure::Input(msg.into()))
}

/// Command-line value, else config-file value, else default.
fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

/// Common flags after merging with the config file.
struct Resolved {
    instance: Option<String>,
    schedule: Option<String>,
    driver_amplitude: Option<f64>,
    trials: Option<usize>,
    seed: u64,
    out: Option<PathBuf>,
    format: OutputFormat,
}

impl Resolved {
    fn new(c: CommonArgs, f: &FileConfig) -> Outcome<Self> {
        let format = match c.format.or_else(|| f.format.clone()) {
            Some(s) => s.parse()?,
            None => OutputFormat::Csv,
        };
        Ok(Resolved {
            instance: c.instance.or_else(|| f.instance.clone()),
            schedule: c.schedule.or_else(|| f.schedule.clone()),
            driver_amplitude: c.driver_amplitude.or(f.driver_amplitude),
            trials: c.trials.or(f.trials),
            seed: pick(c.seed, f.seed, 0),
            out: c.out.or_else(|| f.out.clone()),
            format,
        })
    }

    fn instance(&self) -> Outcome<SpinInstance> {
        let Some(spec) = &self.instance else {
            return input("--instance is required");
        };
        if let Some(name) = spec.strip_prefix("builtin:") {
            return models::by_name(name).ok_or_else(|| Failure::Input(format!("unknown builtin instance '{name}'")));
        }
        let text = std::fs::read_to_string(spec).map_err(|e| Failure::Input(format!("{spec}: {e}")))?;
        let label = std::path::Path::new(spec).file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        Ok(parse_instance(&text).map_err(|e| Failure::Input(format!("{spec}: {e}")))?.labeled(label))
    }

    fn schedule(&self, kind: ScheduleKind, default_amplitude: f64) -> Outcome<AnnealSchedule> {
        Ok(AnnealSchedule::with_amplitude(kind, self.driver_amplitude.unwrap_or(default_amplitude))?)
    }

    fn kind(&self) -> Outcome<Option<ScheduleKind>> {
        Ok(match &self.schedule {
            Some(s) => Some(s.parse()?),
            None => None,
        })
    }

    fn writer(&self) -> Outcome<Box<dyn Write>> {
        Ok(match &self.out {
            Some(path) => Box::new(BufWriter::new(
                File::create(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?,
            )),
            None => Box::new(std::io::stdout().lock()),
        })
    }
}

fn design(flag: Option<String>, file: &Option<String>) -> Outcome<TrialDesign> {
    match flag.or_else(|| file.clone()) {
        Some(s) => Ok(s.parse()?),
        None => Ok(TrialDesign::default()),
    }
}

fn run_sweep(args: SweepArgs, f: &FileConfig) -> Outcome<()> {
    let r = Resolved::new(args.common, f)?;
    let instance = r.instance()?;
    let kinds = match r.kind()? {
        Some(k) => vec![k],
        None => vec![ScheduleKind::Vanilla, ScheduleKind::QuadraticReverse, ScheduleKind::PiecewiseReverse],
    };
    let grid = log_time_grid(
        pick(args.t_min, f.t_min, 0.1),
        pick(args.t_max, f.t_max, 1000.0),
        pick(args.points, f.points, 24),
    )?;
    let mut config = SweepConfig::new(grid, r.trials.unwrap_or(32), r.seed);
    config.design = design(args.design, &f.design)?;
    config.integrator = IntegratorSettings {
        tolerance: pick(args.tolerance, f.tolerance, IntegratorSettings::default().tolerance),
        ..IntegratorSettings::default()
    };
    let results = kinds
        .into_iter()
        .map(|kind| Ok(sweep_anneal_time(&instance, &r.schedule(kind, 1.0)?, &config)?))
        .collect::<Outcome<Vec<_>>>()?;
    write_results(&results, r.format, r.writer()?)?;
    Ok(())
}

fn run_compare(args: CompareArgs, f: &FileConfig) -> Outcome<()> {
    let r = Resolved::new(args.common, f)?;
    let instance = r.instance()?;
    let t = pick(args.anneal_time, f.anneal_time, 1000.0);
    let reverse_kind = r.kind()?.filter(|k| k.is_reverse()).unwrap_or(ScheduleKind::PiecewiseReverse);
    let names = pick(
        args.samplers,
        f.samplers.clone(),
        ["reverse", "vanilla", "sa", "pt-icm"].map(String::from).to_vec(),
    );
    let trials_per_block = r.trials.unwrap_or(16);
    let mut specs = Vec::new();
    for name in &names {
        specs.push(match name.as_str() {
            "reverse" => SamplerSpec::QuantumReverse {
                schedule: r.schedule(reverse_kind, 2.0)?,
                total_time: t,
                trials_per_block,
                design: design(args.design.clone(), &f.design)?,
            },
            "vanilla" => SamplerSpec::QuantumVanilla { schedule: r.schedule(ScheduleKind::Vanilla, 2.0)?, total_time: t },
            "sa" => SamplerSpec::SimulatedAnnealing {
                sweeps_per_read: pick(args.sa_sweeps, f.sa_sweeps, 1000),
                ladder: BetaLadder::default(),
            },
            "pt-icm" => SamplerSpec::PtIcm {
                config: PtIcmConfig { n_sweeps: pick(args.pt_sweeps, f.pt_sweeps, 2000), sample_interval: 5, ..PtIcmConfig::default() },
            },
            "uniform-oracle" => SamplerSpec::UniformOracle,
            other => return input(format!("unknown sampler '{other}'")),
        });
    }
    let table = compare_samplers(
        &instance,
        &specs,
        pick(args.blocks, f.blocks, 8),
        pick(args.block_size, f.block_size, 500),
        r.seed,
    )?;
    write_comparison(&table, r.format, r.writer()?)?;
    Ok(())
}

#[derive(Serialize)]
struct CollectReport {
    sampler: String,
    epsilon: f64,
    overhead: f64,
    seed: u64,
    states: Vec<String>,
    energy: Option<f64>,
    rounds: Vec<fairqa::collector::RoundStats>,
    total_samples: u64,
    /// Brute-force degeneracy, for checking the result.
    true_degeneracy: Option<usize>,
}

fn run_collect(args: CollectArgs, f: &FileConfig) -> Outcome<()> {
    let r = Resolved::new(args.common, f)?;
    let instance = r.instance()?;
    let n = instance.n();
    let sampler = pick(args.sampler, f.sampler.clone(), "quantum-sim".into());
    let config = CollectorConfig {
        n,
        epsilon: pick(args.epsilon, f.epsilon, 0.01),
        overhead: pick(args.overhead, f.overhead, 1.0),
    };
    let ground = enumerate_ground_states(&instance).ok();
    let seed = r.seed;
    let mut calls = 0u64;
    let mut draw_rng = rng::stream_rng(seed, u64::MAX);
    let energy = |s: &BasisState| instance.energy_of_index(s.index());

    let collection = match sampler.as_str() {
        "uniform-oracle" => {
            let Some(g) = &ground else {
                return input("uniform-oracle needs a brute-force ground set (n ≤ 30)");
            };
            let mut oracle = UniformOracle::new(g.states.clone(), seed)?;
            get_lowest_energy_states(&config, || Ok(oracle.sample()), energy)?
        }
        "quantum-sim" => {
            let kind = r.kind()?.unwrap_or(ScheduleKind::PiecewiseReverse);
            let schedule = r.schedule(kind, 2.0)?;
            let t = pick(args.anneal_time, f.anneal_time, 1000.0);
            let mut spec = AnnealRunSpec {
                instance: instance.clone(),
                schedule,
                total_time: t,
                perturbation: None,
                integrator: IntegratorSettings::default(),
            };
            let vanilla_table = if kind.is_reverse() { None } else { Some(evolve(&spec)?.probabilities()) };
            get_lowest_energy_states(
                &config,
                || {
                    let table = match &vanilla_table {
                        Some(t) => t.clone(),
                        None => {
                            spec.perturbation = Some(TrialDesign::Independent.perturbation(n, seed, calls as usize));
                            evolve(&spec)?.probabilities()
                        }
                    };
                    calls += 1;
                    let dist = WeightedIndex::new(&table).map_err(|e| fairqa::Error::Integration(e.to_string()))?;
                    BasisState::new(n, dist.sample(&mut draw_rng) as u64)
                },
                energy,
            )?
        }
        "sa" => {
            let sweeps = pick(args.sa_sweeps, f.sa_sweeps, 1000);
            get_lowest_energy_states(
                &config,
                || {
                    calls += 1;
                    let batch = simulated_annealing(&instance, 1, sweeps, &BetaLadder::default(), rng::derive_seed(seed, calls))?;
                    BasisState::new(n, *batch.counts.keys().next().expect("one read"))
                },
                energy,
            )?
        }
        "pt-icm" => {
            let pt = PtIcmConfig { n_sweeps: pick(args.pt_sweeps, f.pt_sweeps, 2000), n_samples: 500, sample_interval: 5, ..PtIcmConfig::default() };
            let mut pending: Vec<BasisState> = Vec::new();
            get_lowest_energy_states(
                &config,
                || {
                    if pending.is_empty() {
                        calls += 1;
                        let batch = pt_icm(&instance, &PtIcmConfig { seed: rng::derive_seed(seed, calls), ..pt })?;
                        for (&k, &c) in batch.counts.iter().rev() {
                            for _ in 0..c {
                                pending.push(BasisState::new(n, k)?);
                            }
                        }
                        // histogram order is not sample order; shuffle to avoid bias
                        use rand::seq::SliceRandom;
                        pending.shuffle(&mut draw_rng);
                    }
                    Ok(pending.pop().expect("batch is non-empty"))
                },
                energy,
            )?
        }
        other => return input(format!("unknown sampler '{other}' (expected quantum-sim|sa|pt-icm|uniform-oracle)")),
    };

    let report = CollectReport {
        sampler,
        epsilon: config.epsilon,
        overhead: config.overhead,
        seed,
        energy: collection.states.iter().next().map(energy),
        states: collection.states.iter().map(|s| s.bits()).collect(),
        rounds: collection.rounds,
        total_samples: collection.total_samples,
        true_degeneracy: ground.map(|g| g.m()),
    };
    let mut out = r.writer()?;
    match r.format {
        OutputFormat::Json => write_json_value(&report, out)?,
        OutputFormat::Csv => {
            let write = |out: &mut dyn Write| -> std::io::Result<()> {
                writeln!(out, "state_bits")?;
                for s in &report.states {
                    writeln!(out, "{s}")?;
                }
                out.flush()
            };
            write(&mut out).map_err(|e| Failure::Input(e.to_string()))?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct PredictReport {
    ground_energy: f64,
    sector: Sector,
    states: Vec<PredictedState>,
    hard_suppressed: Vec<String>,
    /// Eigenvalues of the perturbation matrix in the sector used.
    epsilons: Vec<f64>,
}

#[derive(Serialize)]
struct PredictedState {
    bits: String,
    label: SuppressionLabel,
    weight: f64,
}

fn run_predict(args: CommonArgs, f: &FileConfig) -> Outcome<()> {
    let r = Resolved::new(args, f)?;
    let instance = r.instance()?;
    let ground = enumerate_ground_states(&instance)?;
    let p = predict_suppression(&instance, &ground)?;
    let states: Vec<PredictedState> = ground
        .states
        .iter()
        .zip(&p.labels)
        .zip(&p.weights)
        .map(|((s, &label), &weight)| PredictedState { bits: s.bits(), label, weight })
        .collect();
    let report = PredictReport {
        ground_energy: ground.energy,
        sector: p.sector,
        hard_suppressed: p.hard_suppressed().iter().map(|&i| ground.states[i].bits()).collect(),
        epsilons: p.even_sector.as_ref().unwrap_or(&p.basis).epsilons.clone(),
        states,
    };
    let mut out = r.writer()?;
    match r.format {
        OutputFormat::Json => write_json_value(&report, out)?,
        OutputFormat::Csv => {
            let write = |out: &mut dyn Write| -> std::io::Result<()> {
                writeln!(out, "state_bits,label,weight")?;
                for s in &report.states {
                    writeln!(out, "{},{:?},{}", s.bits, s.label, s.weight)?;
                }
                out.flush()
            };
            write(&mut out).map_err(|e| Failure::Input(e.to_string()))?;
        }
    }
    Ok(())
}

fn run_gen(args: GenArgs, f: &FileConfig) -> Outcome<()> {
    let r = Resolved::new(args.common, f)?;
    let Some(n) = args.n.or(f.n) else {
        return input("--n is required");
    };
    let kind = pick(args.graph, f.graph.clone(), "regular".into());
    let edges = match kind.as_str() {
        "ring" => graph::ring(n),
        "path" => graph::path(n),
        "complete" => graph::complete(n),
        "grid" => {
            let rows = pick(args.rows, f.rows, 1);
            if rows == 0 || n % rows != 0 {
                return input(format!("{n} spins do not fill {rows} rows"));
            }
            graph::grid(rows, n / rows)
        }
        "regular" => graph::random_regular(n, pick(args.degree, f.degree, 3), r.seed)?,
        other => return input(format!("unknown graph '{other}'")),
    };
    let glass = generate_spinglass(n, &edges, r.seed)?;
    let header = format!(
        "# graph={kind} n={n} seed={} free-spins={} redraws={}\n",
        r.seed,
        serde_json::to_string(&glass.status).unwrap_or_default(),
        glass.redraws
    );
    let mut out = r.writer()?;
    let text = header + &serialize_instance(&glass.instance);
    out.write_all(text.as_bytes()).and_then(|_| out.flush()).map_err(|e| Failure::Input(e.to_string()))?;
    Ok(())
}

fn run(cli: Cli) -> Outcome<()> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path).map_err(Failure::Input)?,
        None => FileConfig::default(),
    };
    match cli.command {
        Command::Sweep(a) => run_sweep(a, &file),
        Command::Compare(a) => run_compare(a, &file),
        Command::Collect(a) => run_collect(a, &file),
        Command::Predict(a) => run_predict(a, &file),
        Command::GenInstance(a) => run_gen(a, &file),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(3)
        }
    }
}

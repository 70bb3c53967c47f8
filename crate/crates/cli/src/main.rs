//! `pcgraph`: simulate VAR data, estimate partial-correlation graphs from
//! CSV samples, aggregate cohorts and run benchmarks.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod ranges;

#[derive(Debug, Parser)]
#[command(
    name = "pcgraph",
    version,
    about = "Partial-correlation graphs for multivariate time series"
)]
struct Cli {
    /// Worker threads for the shared pool (default: all available).
    #[arg(long, global = true, env = "PCGRAPH_WORKERS")]
    workers: Option<usize>,

    /// Directory for output files.
    #[arg(long, global = true, env = "PCGRAPH_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,

    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a VAR model and write the sample, the model and its true graph.
    Simulate(SimulateArgs),
    /// Estimate the graph of a CSV sample.
    Select(SelectArgs),
    /// Per-group connection percentages over many subjects.
    Cohort(CohortArgs),
    /// Benchmark experiments.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum NamedModel {
    A,
    B,
    C,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Built-in model.
    #[arg(long, value_enum, conflicts_with_all = ["random", "model_json"])]
    model: Option<NamedModel>,
    /// Off-diagonal parameter of model B.
    #[arg(long, default_value_t = 0.0)]
    x: f64,
    /// Random sparse model of dimension `--p` with modulus `--k`.
    #[arg(long, conflicts_with = "model_json")]
    random: bool,
    #[arg(long, default_value_t = 20)]
    p: usize,
    #[arg(long, default_value_t = 5)]
    k: usize,
    /// Model JSON file with `phi` and `sigma_eps`.
    #[arg(long)]
    model_json: Option<PathBuf>,
    /// Sample length.
    #[arg(long, default_value_t = 1024)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Burn-in length (default max(10 l p, 500)).
    #[arg(long)]
    burn_in: Option<usize>,
    /// Output file stem.
    #[arg(long, default_value = "sample")]
    name: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
    Dot,
    Table,
}

#[derive(Debug, Args, Clone)]
struct EstimationArgs {
    /// Smoothing half-width (default N/32).
    #[arg(long)]
    m: Option<usize>,
    /// Window shape.
    #[arg(long, default_value = "cosine")]
    window: String,
    /// Explicit window constant C_u (requires --du).
    #[arg(long, requires = "du")]
    cu: Option<f64>,
    /// Explicit window constant D_u (requires --cu).
    #[arg(long, requires = "cu")]
    du: Option<f64>,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Selection method (mht | stepwise).
    #[arg(long, default_value = "mht")]
    method: String,
    /// Constrained-fit tolerance.
    #[arg(long, default_value_t = 1e-8)]
    fit_tol: f64,
    /// Constrained-fit cycle cap.
    #[arg(long, default_value_t = 100)]
    max_iter: usize,
}

#[derive(Debug, Args)]
struct SelectArgs {
    /// CSV sample: header row, one column per channel.
    input: PathBuf,
    /// Use only the first N rows.
    #[arg(long)]
    n: Option<usize>,
    #[command(flatten)]
    est: EstimationArgs,
    /// What to print on stdout.
    #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
    format: OutputFormat,
    /// Output file stem inside the output directory.
    #[arg(long, default_value = "selection")]
    name: String,
    /// Also write smoothed spectrum diagonals and partial coherences.
    #[arg(long)]
    dump_spectrum: bool,
}

#[derive(Debug, Args)]
struct CohortArgs {
    /// Group as `name=file1,file2,...`; files are CSV samples or graph JSON.
    #[arg(long = "group", required = true)]
    groups: Vec<String>,
    #[command(flatten)]
    est: EstimationArgs,
    #[arg(long, default_value = "cohort")]
    name: String,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[command(subcommand)]
    experiment: BenchCommand,
}

#[derive(Debug, Subcommand)]
enum BenchCommand {
    /// Selection wall-clock against dimension on random models.
    Timing(TimingArgs),
    /// FWER against effective power for both methods.
    Power(PowerArgs),
    /// Type I/II error percentages on random models.
    Errors(ErrorArgs),
    /// Selection wall-clock against worker count.
    Scaling(ScalingArgs),
}

#[derive(Debug, Args)]
struct TimingArgs {
    /// Dimensions as `a:b`, `a:b:step` or a comma list.
    #[arg(long, default_value = "10:50:10")]
    p: String,
    #[arg(long, default_value_t = 1024)]
    n: usize,
    /// Smoothing half-width (default N/32).
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value = "mht")]
    method: String,
    #[arg(long, default_value_t = 5)]
    k: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Debug, Args)]
struct PowerArgs {
    #[arg(long, value_enum, default_value_t = NamedModel::B)]
    model: NamedModel,
    #[arg(long, default_value_t = 0.0)]
    x: f64,
    #[arg(long, default_value_t = 512)]
    n: usize,
    #[arg(long, default_value_t = 16)]
    m: usize,
    #[arg(long, default_value_t = 100)]
    reps: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Evaluate only the borderline pairs; all others count as rejected.
    #[arg(long)]
    borderline: bool,
    /// Grid step for alpha (stepdown) and beta (stepwise, alpha = beta^5).
    #[arg(long, default_value_t = 0.00125)]
    step: f64,
}

#[derive(Debug, Args)]
struct ErrorArgs {
    /// Dimensions as `a:b`, `a:b:step` or a comma list.
    #[arg(long, default_value = "10:29")]
    p: String,
    /// Levels as a comma list or `a:b:step`.
    #[arg(long = "alpha-grid", default_value = "0.05")]
    alpha_grid: String,
    #[arg(long, default_value_t = 2048)]
    n: usize,
    /// Smoothing half-width (default N/16).
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value_t = 20)]
    reps: usize,
    #[arg(long, default_value_t = 5)]
    k: usize,
    #[arg(long, default_value = "mht")]
    method: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Allow dimensions above 50.
    #[arg(long)]
    long: bool,
}

#[derive(Debug, Args)]
struct ScalingArgs {
    #[arg(long, default_value_t = 30)]
    p: usize,
    #[arg(long, default_value_t = 2048)]
    n: usize,
    #[arg(long, default_value_t = 128)]
    m: usize,
    /// Worker counts as a comma list (default 1,2,4,...,available).
    #[arg(long = "worker-counts")]
    worker_counts: Option<String>,
    #[arg(long, default_value_t = 5)]
    k: usize,
    #[arg(long, default_value = "mht")]
    method: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

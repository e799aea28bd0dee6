mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use netgof::gof::DEFAULT_BOOTSTRAP;
use netgof::studies::Experiment;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] netgof::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config {path}: {msg}")]
    Config { path: PathBuf, msg: String },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// What a successful command reports through the exit status.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Done,
    Rejected,
}

#[derive(Parser, Debug)]
#[command(name = "netgof", version, about = "Spectral goodness-of-fit tests for network models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit a model to observed data and test it. Exit status 2 means rejected.
    Test(TestArgs),
    /// Run a simulation study and write its CSV.
    Replicate(ReplicateArgs),
    /// Pick the smallest latent dimension the bootstrap test does not reject.
    SelectDim(SelectDimArgs),
    /// Fit latent positions at one or more dimensions and cluster them.
    Communities(CommunitiesArgs),
    /// Regenerate the TW1 table from GOE Monte Carlo.
    TwTable(TwTableArgs),
}

#[derive(Args, Debug, Clone)]
struct RunArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Bootstrap replicates.
    #[arg(long = "B", default_value_t = DEFAULT_BOOTSTRAP)]
    b: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct GraphArgs {
    /// Edge list, one `i j` pair per line.
    #[arg(long)]
    graph: PathBuf,
    /// Node count, for graphs with isolated trailing nodes.
    #[arg(long)]
    nodes: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Model {
    Er,
    BetaExpit,
    Latent,
    Ergm,
    Directed,
    ArdEr,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TestMethod {
    Bootstrap,
    /// Tracy-Widom reference without bootstrap correction.
    Tw,
    /// Exponential law for the smallest singular value (directed only).
    Explaw,
}

#[derive(Args, Debug)]
struct TestArgs {
    #[arg(value_enum)]
    model: Model,
    #[arg(long, required_unless_present = "ard")]
    graph: Option<PathBuf>,
    #[arg(long)]
    nodes: Option<usize>,
    /// ARD counts CSV, for `ard-er`.
    #[arg(long)]
    ard: Option<PathBuf>,
    #[arg(long, value_enum)]
    method: Option<TestMethod>,
    /// Latent dimension, for `latent`.
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// ERGM terms, for `ergm`.
    #[arg(long, value_delimiter = ',', default_value = "edges,triangles")]
    terms: Vec<String>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args, Debug)]
struct ReplicateArgs {
    /// Study id; may instead come from the config file.
    experiment: Option<Experiment>,
    /// TOML or JSON file with any subset of the study settings.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long = "B")]
    b: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    grid: Option<Vec<f64>>,
    #[arg(long)]
    param_sets: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the full report as JSON here.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SelectDimArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long)]
    max_d: Option<usize>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args, Debug)]
struct CommunitiesArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// Number of communities.
    #[arg(long)]
    k: usize,
    /// Latent dimensions to fit; defaults to `k` and `k + 1`.
    #[arg(long, value_delimiter = ',')]
    dims: Option<Vec<usize>>,
    #[arg(long, default_value_t = 200)]
    restarts: usize,
    /// True labels, one per line in node order.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Write `node,d,cluster` rows here.
    #[arg(long)]
    labels_out: Option<PathBuf>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args, Debug)]
struct TwTableArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    size: Option<usize>,
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(cli: Cli) -> CliResult<Verdict> {
    match cli.command {
        Command::Test(a) => commands::test(a),
        Command::Replicate(a) => commands::replicate(a),
        Command::SelectDim(a) => commands::select_dim(a),
        Command::Communities(a) => commands::communities(a),
        Command::TwTable(a) => commands::tw_table(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(Verdict::Done) => ExitCode::SUCCESS,
        Ok(Verdict::Rejected) => ExitCode::from(2),
        Err(e) => {
            eprintln!("netgof: error: {e}");
            ExitCode::from(1)
        }
    }
}

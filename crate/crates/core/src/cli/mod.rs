//! Command-line front end.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | internal error |
//! | 2 | usage error (bad flags or flag values) |
//! | 3 | file could not be read or written |
//! | 4 | malformed CSV (unparsable or missing value) |
//! | 5 | schema error (missing column, empty input, bad arm/status codes) |
//! | 6 | horizon tau outside the observed follow-up |
//! | 7 | rank-deficient or underdetermined regression design |
//! | 8 | invalid configuration file |
//! | 9 | estimation failure (unsupported model, failed bootstrap, ...) |

mod commands;
mod config;
mod io;
mod report;

pub use config::{GridFile, ScenarioFile};
pub use io::{read_sample_csv, write_sample_csv, ColumnSpec};
pub use report::{fmt_fixed, DEFAULT_PRECISION};

use crate::error::Error;
use crate::inference::InferenceMethod;
use crate::linear::CovarianceKind;
use crate::pseudo::{EstimandKind, PseudoMethod, Scale};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

/// Environment variable fixing the number of worker threads.
pub const THREADS_ENV: &str = "PSEUDOMED_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_MALFORMED_CSV: i32 = 4;
pub const EXIT_SCHEMA: i32 = 5;
pub const EXIT_TAU: i32 = 6;
pub const EXIT_RANK: i32 = 7;
pub const EXIT_CONFIG: i32 = 8;
pub const EXIT_ESTIMATION: i32 = 9;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed CSV: {0}")]
    MalformedCsv(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Analysis(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io { .. } => EXIT_IO,
            CliError::MalformedCsv(_) => EXIT_MALFORMED_CSV,
            CliError::Schema(_) => EXIT_SCHEMA,
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Analysis(e) => match e {
                Error::EmptySample | Error::UnknownStatus { .. } => EXIT_SCHEMA,
                Error::TauOutOfRange { .. } | Error::JackknifeSupport { .. } => EXIT_TAU,
                Error::RankDeficient { .. } | Error::TooFewObservations { .. } => EXIT_RANK,
                Error::Config(_) => EXIT_CONFIG,
                Error::InvalidArgument(_) => EXIT_USAGE,
                _ => EXIT_ESTIMATION,
            },
        }
    }

    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "pseudomed", version, about = "Causal mediation analysis for time-to-event outcomes via pseudo-values")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the mediation model to a CSV dataset and report NDE, NIE and TE.
    Mediate(MediateArgs),
    /// Write per-subject pseudo-values for a CSV dataset.
    Pseudo(PseudoArgs),
    /// Simulate a dataset from a scenario file.
    Simulate(SimulateArgs),
    /// Tabulate the true effects of a scenario file.
    Oracle(OracleArgs),
    /// Run the operating-characteristics simulation described by a grid file.
    Opchar(OpcharArgs),
    /// Time jackknife against influence-function pseudo-values.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Input CSV with a header row.
    pub input: PathBuf,
    #[arg(long, default_value = "time")]
    pub time_col: String,
    #[arg(long, default_value = "status")]
    pub status_col: String,
    #[arg(long, default_value = "arm")]
    pub arm_col: String,
    #[arg(long, default_value = "mediator")]
    pub mediator_col: String,
    /// Optional subject identifier column; row numbers are used if absent.
    #[arg(long, default_value = "id")]
    pub id_col: String,
    /// Declared number of event causes (defaults to the largest status seen).
    #[arg(long)]
    pub causes: Option<u32>,
}

#[derive(Debug, Clone, Args)]
pub struct EstimandArgs {
    /// Horizon at which the estimand is evaluated.
    #[arg(long)]
    pub tau: f64,
    /// surv, rmst or cif:<cause>.
    #[arg(long, default_value = "surv", value_parser = parse_scale)]
    pub estimand: Scale,
}

impl EstimandArgs {
    pub fn estimand(&self) -> CliResult<EstimandKind> {
        EstimandKind::new(self.estimand, self.tau).map_err(|e| CliError::Usage(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InferenceChoice {
    Delta,
    Sobel,
    Boot,
}

#[derive(Debug, Clone, Args)]
pub struct MediateArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub estimand: EstimandArgs,
    #[arg(long, default_value = "if", value_parser = parse_pseudo)]
    pub pseudo: PseudoMethod,
    #[arg(long, value_enum, default_value = "delta")]
    pub inference: InferenceChoice,
    #[arg(long, default_value_t = 1000)]
    pub boot_reps: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Resample within treatment arms.
    #[arg(long)]
    pub stratified_boot: bool,
    /// HC1 heteroskedasticity-robust standard errors.
    #[arg(long)]
    pub robust_se: bool,
    /// Covariates adjusted for in both models (comma separated column names).
    #[arg(long, value_delimiter = ',')]
    pub covariates: Vec<String>,
    /// Covariates for the mediator model only.
    #[arg(long, value_delimiter = ',')]
    pub mediator_covariates: Vec<String>,
    /// Covariates for the outcome model only.
    #[arg(long, value_delimiter = ',')]
    pub outcome_covariates: Vec<String>,
    /// Treatment-mediator interaction (not supported; rejected).
    #[arg(long)]
    pub interaction: bool,
    /// Decimal places in numeric output.
    #[arg(long, default_value_t = DEFAULT_PRECISION)]
    pub precision: usize,
    /// Text report destination (stdout if absent).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Effects table as CSV.
    #[arg(long)]
    pub table: Option<PathBuf>,
}

impl MediateArgs {
    pub fn inference_method(&self) -> InferenceMethod {
        match self.inference {
            InferenceChoice::Delta => InferenceMethod::Delta,
            InferenceChoice::Sobel => InferenceMethod::Sobel,
            InferenceChoice::Boot => InferenceMethod::Bootstrap {
                reps: self.boot_reps,
                seed: self.seed,
                stratified: self.stratified_boot,
            },
        }
    }

    pub fn covariance(&self) -> CovarianceKind {
        if self.robust_se {
            CovarianceKind::Hc1
        } else {
            CovarianceKind::Classical
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct PseudoArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub estimand: EstimandArgs,
    /// One or both of jackknife,if; one output column each.
    #[arg(long, default_value = "if", value_delimiter = ',', value_parser = parse_pseudo)]
    pub pseudo: Vec<PseudoMethod>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// Scenario TOML file.
    pub config: PathBuf,
    /// Overrides the seed in the file.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    /// Scenario TOML file.
    pub config: PathBuf,
    #[arg(long, default_value_t = crate::simlab::truth::DEFAULT_NODES)]
    pub nodes: usize,
    /// Also integrate by Monte Carlo with this many mediator draws.
    #[arg(long)]
    pub mc_draws: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 10)]
    pub precision: usize,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct OpcharArgs {
    /// Grid TOML file.
    pub config: PathBuf,
    /// Overrides the replicate count in the file.
    #[arg(long)]
    pub replicates: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_PRECISION)]
    pub precision: usize,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Write uniform QQ pairs of per-replicate p-values to this CSV.
    #[arg(long)]
    pub qq: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// Total sample sizes.
    #[arg(long, value_delimiter = ',', default_value = "100,400,1600")]
    pub sizes: Vec<usize>,
    /// Timed repetitions per size; the median is reported.
    #[arg(long, default_value_t = 5)]
    pub reps: usize,
    #[arg(long, default_value_t = 2.0)]
    pub tau: f64,
    #[arg(long, default_value = "surv", value_parser = parse_scale)]
    pub estimand: Scale,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

fn parse_scale(s: &str) -> Result<Scale, String> {
    s.parse::<Scale>().map_err(|e| e.to_string())
}

fn parse_pseudo(s: &str) -> Result<PseudoMethod, String> {
    s.parse::<PseudoMethod>().map_err(|e| e.to_string())
}

fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("{THREADS_ENV} must be a non-negative integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot configure {threads} worker threads: {e}")))
}

/// Runs the CLI on an explicit argument list and returns the exit code.
pub fn run_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let outcome = configure_threads().and_then(|()| commands::dispatch(&cli.command));
    match outcome {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Entry point for the `pseudomed` binary.
pub fn run() -> i32 {
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    run_with(std::env::args_os())
}

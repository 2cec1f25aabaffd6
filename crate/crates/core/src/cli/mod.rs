//! The `confint` command-line tool.

mod commands;
pub mod config;
pub mod format;
mod verify;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_EMPTY: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn invalid(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INVALID,
            message: message.into(),
        }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_IO,
            message: message.into(),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Domain(_)
            | Error::InvalidBounds(_)
            | Error::RankDeficient(_)
            | Error::DegenerateVariance(_)
            | Error::NotRealizable(_) => EXIT_INVALID,
            Error::EmptyFeasibleSet(_) | Error::PriorIncompatible { .. } | Error::EmptyGrid => {
                EXIT_EMPTY
            }
            Error::CandidateSetExhausted => EXIT_FAILURE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "confint",
    version,
    about = "Confounding intervals for a regression slope"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact interval of adjusted slopes over a bound box.
    Interval(SpecArgs),
    /// Intervals over a lattice of (lower, upper) bounds on rho-hxhy.
    Sweep(SweepArgs),
    /// Summary statistics and sensitivity tuple of a CSV dataset.
    FromData(DataArgs),
    /// Feasible lattice nodes whose adjusted slope leaves a range.
    Region(RegionArgs),
    /// Distribution of the adjusted slope under a prior on the tuple.
    Prior(PriorArgs),
    /// Run the built-in consistency checks.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Flat key-value file; explicit flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SpecArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub rho_xy: Option<f64>,
    /// sigma_y / sigma_x.
    #[arg(long)]
    pub sigma_ratio: Option<f64>,
    /// Bounds on R^2 of x on the confounders [default: 0 0.99].
    #[arg(long, num_args = 2, value_names = ["L", "U"], allow_negative_numbers = true)]
    pub r2x: Option<Vec<f64>>,
    /// Bounds on R^2 of y on the confounders [default: 0 0.99].
    #[arg(long, num_args = 2, value_names = ["L", "U"], allow_negative_numbers = true)]
    pub r2y: Option<Vec<f64>>,
    /// Bounds on the correlation of the fitted values [default: -1 1].
    #[arg(long, num_args = 2, value_names = ["L", "U"], allow_negative_numbers = true)]
    pub rho_hxhy: Option<Vec<f64>>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    /// Lattice points per axis over the rho-hxhy range [default: 21].
    #[arg(long)]
    pub steps: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// CSV with header; columns `x`, `y`, every other column is a confounder.
    pub input: PathBuf,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct RegionArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    /// Range of practically significant slopes; `inf` and `-inf` allowed.
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
    pub exclude: Option<Vec<f64>>,
    /// Lattice points per axis [default: 101].
    #[arg(long)]
    pub resolution: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct PriorArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    /// Accepted samples [default: 10000].
    #[arg(long)]
    pub samples: Option<usize>,
    /// [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Uniform marginals on all three components (the default).
    #[arg(long, conflicts_with_all = ["prior_x2", "prior_y2", "prior_rho"])]
    pub uniform: bool,
    /// Marginal for R^2_wx: `uniform`, `beta:A:B` or `point:V`.
    #[arg(long)]
    pub prior_x2: Option<String>,
    #[arg(long)]
    pub prior_y2: Option<String>,
    #[arg(long)]
    pub prior_rho: Option<String>,
    /// Include every sample in the output.
    #[arg(long)]
    pub emit_samples: bool,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// [default: 1]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Grid resolution for the equivalence check [default: 101].
    #[arg(long)]
    pub resolution: Option<usize>,
    /// Random instances per check [default: 25].
    #[arg(long)]
    pub cases: Option<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// What a successful run produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub code: i32,
}

pub fn execute(cli: Cli) -> Result<Outcome, CliError> {
    match cli.command {
        Command::Interval(a) => commands::interval(&a),
        Command::Sweep(a) => commands::sweep(&a),
        Command::FromData(a) => commands::from_data(&a),
        Command::Region(a) => commands::region(&a),
        Command::Prior(a) => commands::prior(&a),
        Command::Verify(a) => verify::run(&a),
    }
}

/// Parses `args` (program name first), runs the command and reports on
/// the given streams. Returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn std::io::Write, stderr: &mut dyn std::io::Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_INVALID
            } else {
                EXIT_OK
            };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(text.as_bytes())
            } else {
                stdout.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(cli) {
        Ok(out) => {
            if stdout.write_all(out.stdout.as_bytes()).is_err() {
                return EXIT_IO;
            }
            out.code
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message);
            e.code
        }
    }
}

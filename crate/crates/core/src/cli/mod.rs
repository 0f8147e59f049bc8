//! The `htmia` command-line driver.
//!
//! Each subcommand is a thin layer over the library: it resolves settings
//! from flags, an optional TOML config file and defaults (in that order of
//! precedence), runs the corresponding library call and writes its outputs
//! into the output directory. Exit codes form a stable contract:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success, no warnings |
//! | 1 | usage or configuration error |
//! | 2 | data validation error, or a run that completed with data warnings |
//! | 3 | internal error |

mod commands;
pub mod config;

use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::attacks::{AttackKind, SelectionStrategy};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Data,
    Internal,
}

impl ErrorKind {
    fn as_str(self) -> &'static str {
        match self {
            ErrorKind::Usage => "usage",
            ErrorKind::Data => "data",
            ErrorKind::Internal => "internal",
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Usage,
            message: message.into(),
        }
    }

    pub fn data(message: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Data,
            message: message.into(),
        }
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Internal,
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            ErrorKind::Usage => EXIT_USAGE,
            ErrorKind::Data => EXIT_DATA,
            ErrorKind::Internal => EXIT_INTERNAL,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} error: {}", self.kind.as_str(), self.message)
    }
}

impl std::error::Error for CliError {}

/// How a subcommand finished when it did not fail outright.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Clean,
    /// Outputs were written but the data had problems worth a nonzero exit.
    Warnings,
}

#[derive(Debug, Parser)]
#[command(
    name = "htmia",
    version,
    about = "Hard-token membership inference audits over probability traces"
)]
pub struct Cli {
    /// TOML config file; command-line flags take precedence over its values.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Output directory [default: $HTMIA_OUT_DIR, then the config file, then "."].
    #[arg(long, global = true, value_name = "DIR")]
    pub out_dir: Option<PathBuf>,
    /// Seed for randomized subcommands; recorded in every provenance header.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check trace, label and text files against the interchange format.
    Validate(ValidateArgs),
    /// Score every joined sample with the selected attacks.
    Score(ScoreArgs),
    /// Compute AUC and TPR at fixed FPR from scores or traces.
    Eval(EvalArgs),
    /// Evaluate HT-MIA over a grid of selection parameters.
    Sweep(SweepArgs),
    /// Generate synthetic target/reference traces with planted uplift.
    Simulate(SimulateArgs),
    /// Run the Monte Carlo and enumeration checks of the theory.
    Theory(TheoryArgs),
    /// Render an evaluation (and optional theory) report as Markdown.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Trace JSONL files to check.
    #[arg(value_name = "TRACE_FILE")]
    pub traces: Vec<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub labels: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub texts: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct InputArgs {
    /// Target-model trace JSONL.
    #[arg(long, value_name = "FILE")]
    pub target: Option<PathBuf>,
    /// Reference-model trace JSONL.
    #[arg(long, value_name = "FILE")]
    pub reference: Option<PathBuf>,
    /// Extra trace files holding lowercase/augmented variants (repeatable).
    #[arg(long = "variants", value_name = "FILE")]
    pub variants: Vec<PathBuf>,
    /// Labels JSONL; samples without a label are scored as `unknown`.
    #[arg(long, value_name = "FILE")]
    pub labels: Option<PathBuf>,
    /// Raw-text sidecar JSONL used by the zlib attack.
    #[arg(long, value_name = "FILE")]
    pub texts: Option<PathBuf>,
    /// Fraction of samples allowed to fail the join before exiting with 2.
    #[arg(long, value_name = "FRACTION")]
    pub join_tolerance: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SelectionArgs {
    #[arg(long)]
    pub min_k: Option<usize>,
    #[arg(long)]
    pub max_k: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// by_target or by_reference.
    #[arg(long)]
    pub strategy: Option<SelectionStrategy>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct AttackArgs {
    /// Comma-separated attacks [default: every attack whose inputs are present].
    #[arg(long, value_delimiter = ',')]
    pub attacks: Vec<AttackKind>,
    #[arg(long)]
    pub min_k_pp_percent: Option<f64>,
    #[arg(long)]
    pub pac_k_tokens: Option<usize>,
    #[arg(long)]
    pub pac_n_aug: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[command(flatten)]
    pub inputs: InputArgs,
    #[command(flatten)]
    pub selection: SelectionArgs,
    #[command(flatten)]
    pub attacks: AttackArgs,
    /// Output CSV [default: <out-dir>/scores.csv].
    #[arg(long, short, value_name = "FILE")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Score CSV from `htmia score`; when absent, traces are scored first.
    #[arg(long, value_name = "FILE")]
    pub scores: Option<PathBuf>,
    #[command(flatten)]
    pub inputs: InputArgs,
    #[command(flatten)]
    pub selection: SelectionArgs,
    #[command(flatten)]
    pub attacks: AttackArgs,
    /// Comma-separated FPR targets [default: 0.1,0.01].
    #[arg(long, value_delimiter = ',')]
    pub fpr: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub inputs: InputArgs,
    #[command(flatten)]
    pub selection: SelectionArgs,
    #[arg(long, value_delimiter = ',')]
    pub alphas: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    pub min_ks: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    pub max_ks: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    pub strategies: Vec<SelectionStrategy>,
    /// Per-token improvement margins.
    #[arg(long, value_delimiter = ',')]
    pub margins: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// TOML file holding a synthetic trace spec (overrides `[simulate]`).
    #[arg(long, value_name = "FILE")]
    pub spec: Option<PathBuf>,
    #[arg(long)]
    pub n_per_class: Option<usize>,
    #[arg(long)]
    pub member_uplift: Option<f64>,
    #[arg(long)]
    pub nonmember_uplift: Option<f64>,
}

#[derive(Debug, Args)]
pub struct TheoryArgs {
    /// Monte Carlo trials per cell.
    #[arg(long)]
    pub n_trials: Option<u64>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Evaluation JSON [default: <out-dir>/eval_report.json].
    #[arg(long, value_name = "FILE")]
    pub eval: Option<PathBuf>,
    /// Theory validation JSON to summarize as well.
    #[arg(long, value_name = "FILE")]
    pub theory: Option<PathBuf>,
}

/// Parses `args` (including the program name) and runs the subcommand.
/// Returns the process exit code; diagnostics go to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match commands::execute(cli) {
        Ok(Outcome::Clean) => EXIT_OK,
        Ok(Outcome::Warnings) => EXIT_DATA,
        Err(e) => {
            eprintln!("htmia: {e}");
            e.exit_code()
        }
    }
}

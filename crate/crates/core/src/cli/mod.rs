//! The `swrdm` command-line tool.
//!
//! Every subcommand renders its result to a string that goes to `--out` or
//! standard output. Exit status: 0 on success, 2 for usage and validation
//! errors (the message names the flag), 1 for computation and I/O errors
//! (the message starts with the error name).

mod commands;
mod grid;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

use crate::error::Error;
use crate::sim::{SimMode, TieRule, DEFAULT_SEED};

pub use commands::{ClassifyReport, Thresholds, TwoSidedReport};
pub use grid::{parse_sweep, Axis};

/// Environment variable overriding the number of worker threads.
pub const THREADS_ENV: &str = "SWRDM_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "swrdm",
    version,
    about = "Finite-temperature Slepian-Wolf decoding under random binning"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output file; standard output when absent or `-`.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate an entropy spectrum (alpha, epsilon, entropy) or beta_c(R).
    Spectrum(SpectrumArgs),
    /// Boundary polylines of the (R, T) phase diagram.
    Phase(PhaseArgs),
    /// Phase of a single (R, T) point.
    Classify(ClassifyArgs),
    /// Bit-error exponent E(R, beta).
    Exponent(ExponentArgs),
    /// Monte Carlo bit-error rate of the binning ensemble.
    Simulate(SimulateArgs),
    /// Random dilution experiment against the analytic free energy.
    Dilution(DilutionArgs),
    /// Dominant term and reliability of two-sided decoding.
    TwoSided(TwoSidedArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    /// s_{X|Y}, energies -ln P(x, y) per side-information column.
    XGivenY,
    YGivenX,
    /// s_{XY} over pairs.
    Joint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DecoderArg {
    Matched,
    Mismatched,
    Universal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricArg {
    Matched,
    Mismatched,
    Mce,
}

/// `--source`: a JSON source file, or `dsbs:P` for a doubly symmetric
/// binary source with crossover `P`.
#[derive(Debug, Args)]
pub struct SourceArg {
    #[arg(long, value_name = "FILE|dsbs:P")]
    pub source: String,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("input").required(true).args(["source", "closed_form"])))]
pub struct SpectrumArgs {
    #[arg(long, value_name = "FILE|dsbs:P")]
    pub source: Option<String>,
    /// JSON closed form, e.g. {"closed_form": "harmonic", "kappa": 1, "a": 1}.
    #[arg(long, value_name = "FILE")]
    pub closed_form: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "x-given-y")]
    pub kind: KindArg,
    #[arg(long, default_value_t = 101)]
    pub points: usize,
    /// Energy window lo:hi; required for unbounded closed forms.
    #[arg(long, value_name = "LO:HI", allow_hyphen_values = true)]
    pub energy: Option<String>,
    /// Emit beta_c(R) on this rate grid instead of the spectrum.
    #[arg(long, value_name = "A:B:N", allow_hyphen_values = true)]
    pub beta_c: Option<String>,
}

#[derive(Debug, Args)]
pub struct PhaseArgs {
    #[command(flatten)]
    pub source: SourceArg,
    #[arg(long, value_enum, default_value = "matched")]
    pub decoder: DecoderArg,
    /// Points per boundary curve.
    #[arg(long, default_value_t = 256)]
    pub grid: usize,
    #[arg(long, default_value_t = 3.0, allow_negative_numbers = true)]
    pub t_max: f64,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub source: SourceArg,
    #[arg(long, value_enum, default_value = "matched")]
    pub decoder: DecoderArg,
    #[arg(long, allow_negative_numbers = true)]
    pub rate: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub temperature: f64,
}

#[derive(Debug, Args)]
pub struct ExponentArgs {
    #[command(flatten)]
    pub source: SourceArg,
    #[arg(long, allow_negative_numbers = true)]
    pub rate: Option<f64>,
    /// Inverse temperature, or `inf` for word-MAP.
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<String>,
    #[arg(long, value_enum, default_value = "matched")]
    pub metric: MetricArg,
    /// `rate=a:b:n,beta=a:b:n`; either axis may be given alone.
    #[arg(long, allow_hyphen_values = true)]
    pub sweep: Option<String>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub source: SourceArg,
    #[arg(long, required_unless_present = "sweep_n")]
    pub n: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    pub rate: f64,
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    pub beta: String,
    #[arg(long, default_value_t = 1000)]
    pub trials: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "matched")]
    pub metric: MetricArg,
    /// `type-class` or `enumerate`.
    #[arg(long, default_value = "type-class")]
    pub mode: SimMode,
    /// `fractional`, `lowest-index` or `pessimistic`.
    #[arg(long, default_value = "fractional")]
    pub tie_rule: TieRule,
    /// Average the error over all positions instead of the first.
    #[arg(long)]
    pub all_positions: bool,
    /// Comma-separated blocklengths; emits one row per blocklength.
    #[arg(long, value_delimiter = ',', conflicts_with = "n")]
    pub sweep_n: Vec<usize>,
    /// Defaults to json for a single run and csv for a sweep.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct DilutionArgs {
    #[command(flatten)]
    pub source: SourceArg,
    #[arg(long)]
    pub n: usize,
    #[arg(long, allow_negative_numbers = true)]
    pub rate: f64,
    #[arg(long, default_value = "0.2:3:29", allow_hyphen_values = true)]
    pub betas: String,
    #[arg(long, default_value_t = 32)]
    pub realizations: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "x-given-y")]
    pub kind: KindArg,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct TwoSidedArgs {
    #[command(flatten)]
    pub source: SourceArg,
    #[arg(long, allow_negative_numbers = true, required_unless_present = "grid")]
    pub rate_x: Option<f64>,
    #[arg(long, allow_negative_numbers = true, required_unless_present = "grid")]
    pub rate_y: Option<f64>,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub beta: f64,
    /// `rate_x=a:b:n,rate_y=a:b:n`; emits one CSV row per cell.
    #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["rate_x", "rate_y"])]
    pub grid: Option<String>,
}

/// Failure of one invocation.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid {what}: {reason}")]
    Usage { what: String, reason: String },
    #[error("{name}: {0}", name = .0.name())]
    Compute(#[from] Error),
}

impl CliError {
    pub(crate) fn flag(flag: &str, reason: impl Into<String>) -> Self {
        CliError::Usage {
            what: format!("--{flag}"),
            reason: reason.into(),
        }
    }

    /// Range violations name a flag; anything else is a computation error.
    pub(crate) fn validation(e: Error) -> Self {
        match e {
            Error::OutOfRange { what, .. } => CliError::flag(&what.replace('_', "-"), e.to_string()),
            Error::MemoryBudgetExceeded { .. } => CliError::flag("n", e.to_string()),
            other => CliError::Compute(other),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage { .. } => 2,
            CliError::Compute(_) => 1,
        }
    }
}

fn threads_from_env() -> Result<usize, CliError> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(0),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(k) if k > 0 => Ok(k),
            _ => Err(CliError::Usage {
                what: format!("{THREADS_ENV} environment variable"),
                reason: format!("expected a positive integer, got '{v}'"),
            }),
        },
    }
}

/// Validates the output path before any computation.
fn check_out(out: Option<&std::path::Path>) -> Result<(), CliError> {
    let Some(p) = out.filter(|p| *p != std::path::Path::new("-")) else {
        return Ok(());
    };
    if p.is_dir() {
        return Err(CliError::flag("out", format!("{} is a directory", p.display())));
    }
    match p.parent() {
        Some(dir) if !dir.as_os_str().is_empty() && !dir.is_dir() => Err(CliError::flag(
            "out",
            format!("directory {} does not exist", dir.display()),
        )),
        _ => Ok(()),
    }
}

/// Runs a parsed invocation.
pub fn execute(cli: &Cli) -> Result<(), CliError> {
    let threads = threads_from_env()?;
    check_out(cli.out.as_deref())?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    let text = pool.install(|| commands::dispatch(&cli.command))?;
    crate::report::emit(cli.out.as_deref(), &text)?;
    Ok(())
}

/// Parses `args` (including the program name) and runs; returns the exit
/// status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

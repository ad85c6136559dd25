//! `percolo` — drives the percolation experiments, the noisy sampler, the
//! threshold/bound calculators, and the self-verification suites.
//!
//! Exit codes: 0 success, 1 I/O error, 2 parameter error, 3 threshold
//! refusal, 4 verification failure.

mod cmd;
mod config;
mod out;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use percolo::SimError;

use config::FileConfig;

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Parser)]
#[command(name = "percolo", version, about = "Percolation-based simulator for noisy constant-depth linear optics")]
struct Cli {
    /// RNG seed; recorded in every output and reproduces runs byte for byte.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write the data body here instead of stdout (CSV gains a .meta.json sidecar).
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Body format where a command supports both.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// JSON file supplying defaults for any flag (explicit flags win).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Jsonl,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sweep max component size over (eta, N) grids on generated graphs.
    Percolate(cmd::percolate::Args),
    /// Draw noisy samples from a circuit via percolation into small components.
    Sample(cmd::sample::Args),
    /// Report the simulability verdict, y*, tail bound, and dimension bound.
    Threshold(cmd::threshold::Args),
    /// Run the built-in correctness checks and report per-check results.
    Verify(cmd::verify::Args),
    /// Evolve random circuits as MPS and validate bond/rank/fidelity bounds.
    MpsCheck(cmd::mps_check::Args),
}

/// Command outcomes that map onto the documented exit codes.
#[derive(Debug)]
pub enum CliError {
    Sim(SimError),
    Io(std::io::Error),
    /// One or more verification checks failed.
    Verification(String),
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        CliError::Sim(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Sim(SimError::NotSimulable { .. }) => 3,
            CliError::Sim(_) => 2,
            CliError::Verification(_) => 4,
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Sim(e) => format!("error: {e}"),
            CliError::Io(e) => format!("io error: {e}"),
            CliError::Verification(m) => format!("verification failed: {m}"),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let file = match FileConfig::load(cli.config.as_deref()) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("{}", e.message());
            return ExitCode::from(e.exit_code());
        }
    };
    let common = config::Common {
        seed: cli.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
        out: cli.out.or_else(|| file.out.clone().map(PathBuf::from)),
        format: cli.format.or_else(|| file.format_enum()),
    };
    let result = match cli.command {
        Command::Percolate(args) => cmd::percolate::run(args, &common, &file),
        Command::Sample(args) => cmd::sample::run(args, &common, &file),
        Command::Threshold(args) => cmd::threshold::run(args, &common, &file),
        Command::Verify(args) => cmd::verify::run(args, &common),
        Command::MpsCheck(args) => cmd::mps_check::run(args, &common, &file),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

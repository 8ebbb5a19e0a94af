//! `cqe`: runs contracted-quantum-eigensolver experiments on the Tavis-Cummings
//! model and writes plot-ready CSV.
//!
//! Exit codes: 0 success, 1 validation error, 2 numerical failure.

mod commands;
mod config;
mod golden;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Numerical(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "invalid input: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<cqe_core::Error> for CliError {
    fn from(e: cqe_core::Error) -> Self {
        use cqe_core::Error as E;
        match e {
            E::ExpNotConverged { .. }
            | E::ExpNormDrift { .. }
            | E::NonFinite(_)
            | E::ZeroNorm
            | E::NoCrossing { .. } => CliError::Numerical(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BackendArg {
    Exact,
    Sampled,
}

#[derive(Debug, Clone, Default, Args)]
struct Common {
    /// TOML run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Root seed for sampled backends.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    backend: Option<BackendArg>,
    /// Shots per expectation value (sampled backend).
    #[arg(long)]
    shots: Option<u64>,
    /// Write the result as the golden file instead of comparing against it.
    #[arg(long)]
    bless: bool,
    #[arg(long)]
    golden_dir: Option<PathBuf>,
    #[arg(long)]
    n_sites: Option<usize>,
    #[arg(long)]
    omega_b: Option<f64>,
    #[arg(long)]
    omega_f: Option<f64>,
    #[arg(long)]
    n_max: Option<usize>,
    #[arg(long)]
    max_iters: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
struct Range {
    #[arg(long)]
    g_lo: Option<f64>,
    #[arg(long)]
    g_hi: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// One CQE solve; writes trace.csv and summary.toml.
    Solve {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        g_c: Option<f64>,
        /// Term file for a general fermion-boson Hamiltonian instead of the TC model.
        #[arg(long)]
        hamiltonian: Option<PathBuf>,
        #[arg(long)]
        fermion_modes: Option<usize>,
    },
    /// CQE against exact diagonalization over a coupling grid; writes sweep.csv.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        range: Range,
    },
    /// Ground-state level crossings in a coupling range; writes crossings.csv.
    Crossings {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        range: Range,
    },
    /// Exact ground state across boson truncations; writes truncation.csv.
    TruncationCheck {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        g_c: Option<f64>,
        /// Truncation levels, comma separated.
        #[arg(long, value_delimiter = ',')]
        levels: Option<Vec<usize>>,
    },
    /// Sampled sweeps over a shot grid, fitted to a target mean error; writes calibration.csv.
    CalibrateShots {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        range: Range,
        /// Shot counts, comma separated.
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<u64>>,
        #[arg(long)]
        target: Option<f64>,
    },
}

#[derive(Debug, Parser)]
#[command(
    name = "cqe",
    version,
    about = "Contracted quantum eigensolver experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cqe: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

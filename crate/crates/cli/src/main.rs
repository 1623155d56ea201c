//! `spinbeats` command-line front end.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error(transparent)]
    Sim(#[from] spinbeats::Error),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Verification(_) => 3,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "spinbeats",
    version,
    about = "Radical-pair relaxation on simulated qubits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Clone, Default)]
pub struct CommonArgs {
    /// TOML config, or a CSV previously written by this tool.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
    /// Shots per circuit; 0 for exact probabilities.
    #[arg(long, value_name = "N")]
    pub shots: Option<u64>,
    /// Output CSV (stdout when omitted).
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Also write an SVG plot next to the CSV.
    #[arg(long)]
    pub svg: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Relaxed singlet yield over a time grid.
    Simulate(CommonArgs),
    /// Time-resolved magnetic field effect from low- and high-field runs.
    Mfe(CommonArgs),
    /// Detector-noise Monte Carlo on the field effect.
    NoiseStudy(CommonArgs),
    /// Run the numerical self-checks.
    Verify(VerifyArgs),
}

#[derive(Debug, Args, Clone, Default)]
pub struct VerifyArgs {
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
    /// JSON report path.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Use the sign-flipped dephasing exponent; the suite should fail.
    #[arg(long)]
    pub inject_pz_sign_flip: bool,
}

fn init_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("SPINBEATS_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::Config(format!(
            "SPINBEATS_THREADS must be a positive integer, got `{raw}`"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("cannot size thread pool: {e}")))
}

fn run(cli: Cli) -> Result<(), CliError> {
    init_threads()?;
    match cli.command {
        Command::Simulate(a) => commands::simulate(&a),
        Command::Mfe(a) => commands::mfe(&a),
        Command::NoiseStudy(a) => commands::noise_study(&a),
        Command::Verify(a) => commands::verify(&a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("spinbeats: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

//! `tabasco` command-line front end.
//!
//! Subcommands:
//!
//! * `estimate`: shrinkage estimate of a data matrix read from CSV.
//! * `simulate`: Monte-Carlo NMSE campaign described by a TOML file.
//! * `oracle`: population-level optimal shrinkage table for a covariance model.
//! * `stap-demo`: synthetic space-time adaptive processing detection map.
//!
//! Every command writes its tables as CSV and mirrors them in a JSON file
//! next to the CSV output.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod estimate;
mod io;
mod oracle;
mod simulate;
mod stap;

use io::UsageError;

/// Seed used when neither `--seed` nor `TABASCO_SEED` nor the config provides one.
pub const DEFAULT_SEED: u64 = 20240601;

#[derive(Parser)]
#[command(name = "tabasco", version, about = "Regularized tapered sample covariance estimation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the covariance matrix of the observations in a CSV file.
    Estimate(estimate::EstimateArgs),
    /// Run a Monte-Carlo NMSE campaign.
    Simulate(simulate::SimulateArgs),
    /// Tabulate the optimal shrinkage intensity and NMSE for a known covariance.
    Oracle(oracle::OracleArgs),
    /// Build a space-time detection map on synthetic clutter.
    StapDemo(stap::StapArgs),
}

/// Seed flag shared by the randomized commands.
#[derive(Args, Debug, Clone)]
pub struct SeedArg {
    /// RNG seed. Falls back to `TABASCO_SEED`, then the config file, then 20240601.
    #[arg(long, env = "TABASCO_SEED")]
    pub seed: Option<u64>,
}

impl SeedArg {
    pub fn resolve(&self, from_config: Option<u64>) -> u64 {
        self.seed.or(from_config).unwrap_or(DEFAULT_SEED)
    }
}

/// Output path shared by all commands; the JSON mirror goes next to it.
#[derive(Args, Debug, Clone)]
pub struct OutputArg {
    #[arg(long, short)]
    pub output: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Estimate(args) => estimate::run(&args),
        Command::Simulate(args) => simulate::run(&args),
        Command::Oracle(args) => oracle::run(&args),
        Command::StapDemo(args) => stap::run(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            // Same status clap uses for bad invocations.
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}

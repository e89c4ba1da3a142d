//! `divim`: diversity-aware seed selection from the command line.

mod commands;
mod config;
mod data;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{ConfigArgs, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] divim_core::Error),
    #[error("cannot write {path}: {source}", path = .path.display())]
    Output {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use divim_core::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Output { .. } => 3,
            CliError::Core(e) => match e {
                E::InvalidArgument(_)
                | E::TooFewSeeds(_)
                | E::OverBudget { .. }
                | E::BudgetTooLarge { .. } => 2,
                E::EnumerationBound(_) => 4,
                _ => 3,
            },
        }
    }
}

#[derive(Parser)]
#[command(name = "divim", version, about = "Diversity-aware influence maximization")]
struct Cli {
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true, env = "DIVIM_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Choose k seeds for the configured objective.
    Select(ConfigArgs),
    /// Report spread, utilities and diagnostics for a given seed file.
    Evaluate(ConfigArgs),
    /// Write per-trial cascade sizes as CSV.
    Simulate(ConfigArgs),
    /// Exact spreads (and optionally the exact optimum) on tiny instances.
    Oracle {
        #[command(flatten)]
        args: ConfigArgs,
        /// Also search all k-subsets for the best objective value.
        #[arg(long)]
        optimum: bool,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("threads: {e}")))?;
    }
    match cli.command {
        Command::Select(a) => commands::select(&RunConfig::resolve(&a)?),
        Command::Evaluate(a) => commands::evaluate(&RunConfig::resolve(&a)?),
        Command::Simulate(a) => commands::simulate(&RunConfig::resolve(&a)?),
        Command::Oracle { args, optimum } => commands::oracle(&RunConfig::resolve(&args)?, optimum),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("divim: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

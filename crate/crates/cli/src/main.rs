//! `hcm`: correlation statistics of homodyne correlation measurements from
//! the command line. Every subcommand writes CSV to `--out` or stdout.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod scenario;
mod tasks;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hcm::Error;

use scenario::{Scenario, Task};

#[derive(Debug, Parser)]
#[command(name = "hcm", version, about = "Full statistics of homodyne correlation measurements")]
struct Cli {
    /// Scenario or experiment config (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output CSV path; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Points of the M grid (or of the phase grid for `scan-phase`).
    #[arg(long, global = true)]
    grid_points: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Density of M on a grid.
    Pdf,
    /// Mean, variance, r and D.
    Moments,
    /// Moments and indicators against the LO phase.
    ScanPhase,
    /// r and D verdicts.
    Nonclassicality,
    /// Photon-counting Monte-Carlo histogram against the closed form.
    Simulate {
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        bins: Option<usize>,
    },
    /// Datasets behind the figures.
    Figure {
        #[arg(value_parser = clap::value_parser!(u8).range(2..=7))]
        number: u8,
    },
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(Error::Validity(_)) => 3,
            CliError::Core(Error::NonConvergence { .. }) => 4,
            CliError::Core(_) | CliError::Io { .. } => 2,
        }
    }
}

fn load(cli: &Cli, task: Task) -> Result<Scenario, CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::Config("--config <path> is required for this subcommand".into()))?;
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(Scenario::from_json(&text, task)?)
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let (mut scenario, samples, bins) = match &cli.command {
        Command::Pdf => (load(cli, Task::Pdf)?, None, None),
        Command::Moments => (load(cli, Task::Moments)?, None, None),
        Command::ScanPhase => (load(cli, Task::ScanPhase)?, None, None),
        Command::Nonclassicality => (load(cli, Task::Nonclassicality)?, None, None),
        Command::Simulate { samples, bins } => (load(cli, Task::Simulate)?, *samples, *bins),
        Command::Figure { number } => (scenario::figure(*number)?, None, None),
    };
    scenario.apply_overrides(cli.grid_points, cli.seed, samples, bins);
    log::info!("running {:?} ({})", scenario.task, scenario.name);
    let csv = tasks::run(&scenario)?;
    match cli.out.as_ref().or(scenario.output.as_ref()) {
        Some(path) => std::fs::write(path, csv).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

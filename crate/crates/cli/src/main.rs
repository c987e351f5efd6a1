//! `cnsim` — command-line runner for the conditional spin-flip simulator.
//!
//! With no arguments it runs the first digital experiment at the reference
//! parameters and writes `fig2a.csv` plus `fig2a.report.json`. The
//! `acceptance` subcommand runs the full validation suite instead.
//!
//! Exit codes: 0 the gate (or suite) passed, 1 it ran but failed its checks,
//! 2 the configuration was invalid or a file was unusable, 3 the numerics
//! broke down mid-run.

mod acceptance;
mod config;
mod experiment;
mod report;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use config::RunArgs;

/// Errors surfaced to the user, each mapped to a process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] cnsim_core::Error),
}

fn core_exit_code(err: &cnsim_core::Error) -> i32 {
    use cnsim_core::Error;
    match err {
        Error::NumericalBlowup { .. }
        | Error::EigendecompositionFailed
        | Error::NonRealPopulations { .. } => 3,
        Error::TruthTableMember { source, .. } => core_exit_code(source),
        _ => 2,
    }
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Core(e) => core_exit_code(e),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "cnsim",
    version,
    about = "Simulates a conditional spin-flip pulse on an Ising-coupled spin-1/2 cluster"
)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Subcommand)]
enum Command {
    /// Run the validation suite and write a machine-readable summary
    Acceptance {
        /// TOML file with system parameters and run settings
        #[arg(long)]
        config: Option<PathBuf>,
        /// Summary file to write
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn run_command(args: &RunArgs) -> Result<bool, CliError> {
    let cfg = config::resolve_experiment(args)?;
    let outcome = experiment::run_experiment(&cfg)?;
    let report = &outcome.report;
    let fin = &report.final_populations;
    println!(
        "experiment {} ({}): gate {}",
        cfg.experiment,
        report.initial_label,
        if report.passed { "PASSED" } else { "FAILED" },
    );
    println!(
        "  final active populations: r00 = {:.6}, r11 = {:.6}, r22 = {:.6}, r33 = {:.6}",
        fin[0], fin[1], fin[2], fin[3],
    );
    println!(
        "  active error = {:.3e} (tolerance {:.1e}), max passive drift = {:.3e} (tolerance {:.1e})",
        report.active_error,
        report.active_tolerance,
        report.max_passive_drift,
        report.passive_tolerance,
    );
    println!(
        "  time series: {}; gate report: {}",
        outcome.timeseries_path.display(),
        outcome.report_path.display(),
    );
    Ok(report.passed)
}

fn acceptance_command(
    config: Option<&PathBuf>,
    output: Option<&PathBuf>,
) -> Result<bool, CliError> {
    let cfg = config::resolve_acceptance(config.map(|p| p.as_path()), output.map(|p| p.as_path()))?;
    acceptance::run_acceptance(&cfg)
}

fn main() {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        None => run_command(&cli.run),
        Some(Command::Acceptance { config, output }) => {
            acceptance_command(config.as_ref(), output.as_ref())
        }
    };
    let code = match outcome {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}

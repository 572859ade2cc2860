use std::process::ExitCode;

use clap::{Parser, Subcommand};
use otreg_cli::commands::{
    run_convergence, run_fit, run_ingest_counts, run_predict, run_residuals, run_simulate,
    ConvergenceArgs, FitArgs, IngestArgs, PredictArgs, ResidualsArgs, SimulateArgs,
};
use otreg_cli::exit_code;

/// Distribution-on-distribution regression with optimal transport maps.
#[derive(Debug, Parser)]
#[command(name = "otreg", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic dataset.
    Simulate(SimulateArgs),
    /// Fit the regression map to a dataset.
    Fit(FitArgs),
    /// Push a predictor through a fitted map.
    Predict(PredictArgs),
    /// Residual maps, their mean and a plot.
    Residuals(ResidualsArgs),
    /// Monte Carlo study of the estimation error.
    Convergence(ConvergenceArgs),
    /// Smooth age-at-death counts into quantile files.
    IngestCounts(IngestArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(a) => run_simulate(a),
        Command::Fit(a) => run_fit(a),
        Command::Predict(a) => run_predict(a),
        Command::Residuals(a) => run_residuals(a),
        Command::Convergence(a) => run_convergence(a),
        Command::IngestCounts(a) => run_ingest_counts(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}

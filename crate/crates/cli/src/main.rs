use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod output;

/// Streetlight control toolkit: mask ingestion, segmentation metrics,
/// day/night decisions, threshold calibration and lamp-network simulation.
#[derive(Debug, Parser)]
#[command(name = "streetlight", version, about)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// JSON tool configuration (class map, thresholds, filter radius, ...)
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Seed for any randomized step; overrides seeds in input files
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,
    /// Treat recoverable input problems (unknown palette colors) as errors
    #[arg(long, global = true)]
    pub strict: bool,
    /// Output file, or output directory for `ingest`
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Convert palette label images into 3-class index masks
    Ingest(commands::ingest::IngestArgs),
    /// Score predicted masks against ground truth
    Evaluate(commands::evaluate::EvaluateArgs),
    /// Decide DAY or NIGHT from an image or from a place and time
    Daynight(commands::daynight::DaynightArgs),
    /// Fit day/night brightness thresholds from labelled image folders
    Calibrate(commands::calibrate::CalibrateArgs),
    /// Run a lamp-network scenario and report energy use
    Simulate(commands::simulate::SimulateArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Ingest(a) => commands::ingest::run(a, &cli.common),
        Command::Evaluate(a) => commands::evaluate::run(a, &cli.common),
        Command::Daynight(a) => commands::daynight::run(a, &cli.common),
        Command::Calibrate(a) => commands::calibrate::run(a, &cli.common),
        Command::Simulate(a) => commands::simulate::run(a, &cli.common),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            ExitCode::FAILURE
        }
    }
}

/// The error and its causes on one line. Core file errors already embed
/// their cause, so repeated text is skipped.
fn describe(e: &anyhow::Error) -> String {
    let mut msg = e.to_string();
    for cause in e.chain().skip(1) {
        let text = cause.to_string();
        if !msg.contains(&text) {
            msg = format!("{msg}: {text}");
        }
    }
    msg
}

mod commands;
mod config;
mod exit;
mod output;
mod resolve;
mod svg;

use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use serde::Serialize;

use commands::broadband::BroadbandArgs;
use commands::compare::CompareArgs;
use commands::curve::CurveArgs;
use commands::spectrum::SpectrumArgs;
use config::OutputArgs;

/// Capacities of diffraction-limited optical links.
///
/// Settings come from a JSON config file (--config, else the path in
/// DIFFRACTION_CHANNEL_CONFIG) whose keys are the long flag names; flags
/// given on the command line override it.
#[derive(Debug, Parser)]
#[command(name = "diffraction-channel", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Transmissivity spectrum of one link (CSV `rank,eta`)
    #[command(allow_negative_numbers = true)]
    Spectrum(SpectrumArgs),
    /// Capacity against L/x_R, numeric and both closed forms
    #[command(allow_negative_numbers = true)]
    CapacityCurve(CurveArgs),
    /// Lens versus free propagation versus pinhole (JSON)
    #[command(allow_negative_numbers = true)]
    Compare(CompareArgs),
    /// Capacity over a frequency band at fixed mean power (JSON)
    #[command(allow_negative_numbers = true)]
    Broadband(BroadbandArgs),
}

fn settings<A: Serialize>(args: &A, out: &OutputArgs) -> Result<config::Settings> {
    config::load(out.config.as_deref(), &[serde_json::to_value(args)?])
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Spectrum(a) => commands::spectrum::run(&settings(&a, &a.output)?),
        Command::CapacityCurve(a) => commands::curve::run(&settings(&a, &a.output)?),
        Command::Compare(a) => commands::compare::run(&settings(&a, &a.output)?),
        Command::Broadband(a) => commands::broadband::run(&settings(&a, &a.output)?),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::INVALID } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit::code(&e))
        }
    }
}

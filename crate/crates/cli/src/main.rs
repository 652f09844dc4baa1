//! `quanv` — generate synthetic spectra, train quanvolutional or classical
//! peak-finding models, evaluate checkpoints, and compare model groups.
//!
//! Exit codes: 0 success, 2 usage error, 3 I/O error, 4 numeric failure.

mod commands;
mod manifest;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "quanv",
    version,
    about = "Quanvolutional vs classical peak finding on synthetic spectra"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a dataset (JSON Lines) plus its split-index sidecar.
    Generate(commands::generate::GenerateArgs),
    /// Train one model and write its run directory.
    Train(commands::train::TrainArgs),
    /// Evaluate one or more checkpoints and write a metrics report.
    Evaluate(commands::evaluate::EvaluateArgs),
    /// Run a manifest of models (training any that are missing) and compare
    /// the groups against the classical baseline.
    Compare(commands::compare::CompareArgs),
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(args) => commands::generate::run(args),
        Command::Train(args) => commands::train::run(args),
        Command::Evaluate(args) => commands::evaluate::run(args),
        Command::Compare(args) => commands::compare::run(args),
    };
    if let Err(err) = result {
        eprintln!("error: {err}");
        std::process::exit(exit_code(&err));
    }
}

fn exit_code(err: &quanv_core::Error) -> i32 {
    match err {
        quanv_core::Error::InvalidInput(_) | quanv_core::Error::Unsupported(_) => 2,
        quanv_core::Error::Io(_) | quanv_core::Error::Json(_) => 3,
        quanv_core::Error::Numeric(_) => 4,
    }
}

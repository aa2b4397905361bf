//! `moldep`: configuration-driven front end for the deposition simulator.
//!
//! Exit codes: 0 success, 1 validation failure, 2 runtime error.

mod config;
mod manifest;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use run::{Command, Options};

#[derive(Debug)]
pub enum CliError {
    /// Bad configuration, dataset or physical setup.
    Validation(String),
    /// Failure while computing or writing results.
    Runtime(anyhow::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "invalid: {m}"),
            CliError::Runtime(e) => write!(f, "error: {e:#}"),
        }
    }
}

#[derive(Parser)]
#[command(name = "moldep", version, about = "Coherently controlled molecular deposition in two-color standing waves")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Sample V_ni, V_in and V; list extrema; report periodicity.
    Potential(RunArgs),
    /// Deposit an ensemble and analyse the peaks.
    Deposit(RunArgs),
    /// Repeat the deposition over the values in [sweep].
    Sweep(RunArgs),
    /// Thermal-mixture deposition.
    Mixture(RunArgs),
    /// Check config, dataset and resonance condition without writing files.
    Validate(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML configuration file, or a manifest.json from an earlier run.
    config: PathBuf,
    /// Override a config key, e.g. `--set field.theta_f=2.0`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Worker threads for the trajectory ensemble.
    #[arg(long)]
    workers: Option<usize>,
    /// Treat an unmet resonance condition as an error.
    #[arg(long)]
    strict: bool,
    /// Output directory (overrides output.dir).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Sub::Potential(a) => (Command::Potential, a),
        Sub::Deposit(a) => (Command::Deposit, a),
        Sub::Sweep(a) => (Command::Sweep, a),
        Sub::Mixture(a) => (Command::Mixture, a),
        Sub::Validate(a) => (Command::Validate, a),
    };
    if args.workers == Some(0) {
        eprintln!("invalid: --workers must be at least 1");
        return ExitCode::from(1);
    }
    let result = config::load(&args.config, &args.overrides).and_then(|cfg| {
        run::execute(
            command,
            cfg,
            &Options {
                overrides: args.overrides.clone(),
                workers: args.workers,
                strict: args.strict,
                out: args.out.clone(),
            },
        )
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(match e {
                CliError::Validation(_) => 1,
                CliError::Runtime(_) => 2,
            })
        }
    }
}

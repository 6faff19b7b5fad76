//! Scenario runner: ingest a JSON config describing a quadratic
//! Hamiltonian, an initial Gaussian state, and requested outputs; run
//! flows, propagation, symbols, and indices; emit CSV/JSON artifacts and
//! the verification suite.

mod config;
mod runner;
mod schema;

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "quadflow", version, about = "quadratic-Hamiltonian dynamics toolkit")]
struct Cli {
    /// Print the config schema and CSV column documentation, then exit.
    #[arg(long, global = true)]
    schema: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario config and write artifacts to an output directory.
    Run {
        config: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Run the verification suite (quick by default).
    Verify {
        /// Run the complete draw counts, including the degenerate
        /// weak-limit check.
        #[arg(long)]
        full: bool,
        /// Seed for the randomized property checks.
        #[arg(long, default_value_t = quadflow::verify::DEFAULT_SEED)]
        seed: u64,
    },
    /// Compute the winding index along the configured flow; JSON to stdout,
    /// artifacts to the optional output directory.
    Index {
        config: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Compute the endpoint Weyl symbols of the configured flow; JSON to
    /// stdout, artifacts to the optional output directory.
    Symbol {
        config: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.schema {
        print!("{}", schema::SCHEMA_TEXT);
        return ExitCode::SUCCESS;
    }
    let Some(command) = cli.command else {
        eprintln!("error: a subcommand is required (or pass --schema); see --help");
        return ExitCode::from(2);
    };
    let result = match command {
        Command::Run { config, output } => runner::run(&config, &output),
        Command::Verify { full, seed } => runner::verify(seed, full),
        Command::Index { config, output } => runner::index(&config, output.as_deref()),
        Command::Symbol { config, output } => runner::symbol(&config, output.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(runner::CliError::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

//! `hlpush`: experiment runner for the Hall–Littlewood PushTASEP suite.

mod config;
mod crosscheck;
mod she;
mod simulate;
mod tabulate;
mod validate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{UsageError, VERSION};

#[derive(Parser)]
#[command(name = "hlpush", version = VERSION, about = "Simulation, exact formulas and acceptance checks for HL-PushTASEP")]
struct Cli {
    /// JSON file with the command's fields; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for output files.
    #[arg(long, global = true, env = "HLPUSH_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,
    /// Worker threads (default: logical CPUs).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample N_{νt}(t) from step-Bernoulli data.
    Simulate(simulate::Args),
    /// Tabulate a limit distribution function on a grid.
    Tabulate(tabulate::Args),
    /// Compare an exact formula with Monte Carlo or another oracle.
    Crosscheck(crosscheck::Args),
    /// Weak-noise fields and heat-kernel diagnostics.
    She(she::Args),
    /// Run the acceptance suite.
    Validate(validate::Args),
}

/// Whether every gate of the command passed.
type Outcome = anyhow::Result<bool>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let file = cli.config.as_deref();
    let out = cli.out_dir.as_path();
    let result: Outcome = match &cli.command {
        Command::Simulate(a) => simulate::run(file, out, a),
        Command::Tabulate(a) => tabulate::run(file, out, a),
        Command::Crosscheck(a) => crosscheck::run(file, out, a),
        Command::She(a) => she::run(file, out, a),
        Command::Validate(a) => validate::run(file, out, a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) if e.is::<UsageError>() => {
            eprintln!("usage error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

//! Command-line front end for weak-measurement time observables.
//!
//! Every subcommand reads a flat key = value configuration file, runs one
//! physics computation from the library, and serializes a deterministic
//! CSV table.  Identical configurations produce byte-identical output
//! regardless of the thread count.
//!
//! Exit codes: 0 on success, 2 for configuration and usage errors, 3 when
//! a quadrature fails to converge, 4 for physical-domain failures (and
//! for a failing `validate` suite).

mod commands;
mod config;
mod table;

use std::fs;
use std::path::PathBuf;
use std::process;

use clap::{Args, Parser, Subcommand};
use commands::{CliError, CommandOutput};
use config::RunConfig;

#[derive(Parser)]
#[command(
    name = "timeobs",
    about = "Weak-measurement time observables in one-dimensional quantum mechanics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Run configuration file of flat key = value lines.
    #[arg(long)]
    config: PathBuf,

    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Worker threads for grid evaluation; all cores when omitted.
    #[arg(long)]
    threads: Option<usize>,

    /// Override of the quadrature relative tolerance.
    #[arg(long)]
    tolerance: Option<f64>,

    /// Seed for the sampled suites (weak-sim extras and validate).
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Time densities over a position grid.
    Times(CommonArgs),
    /// Asymptotic transmission time behind the barrier.
    Asymptotic(CommonArgs),
    /// Two-level dwell and conditional times over a time grid.
    TwoLevel(CommonArgs),
    /// Complex arrival expectation against the classical flux.
    Arrival(CommonArgs),
    /// Pointer-simulation sweep against closed-form readings.
    WeakSim(CommonArgs),
    /// Seeded cross-module invariant suite.
    Validate(CommonArgs),
}

impl Command {
    fn args(&self) -> &CommonArgs {
        match self {
            Command::Times(a)
            | Command::Asymptotic(a)
            | Command::TwoLevel(a)
            | Command::Arrival(a)
            | Command::WeakSim(a)
            | Command::Validate(a) => a,
        }
    }
}

fn main() {
    process::exit(run(Cli::parse()));
}

fn run(cli: Cli) -> i32 {
    let args = cli.command.args();
    if let Some(threads) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("config error: cannot configure {threads} threads: {e}");
            return 2;
        }
    }

    let run_cfg = match RunConfig::load(&args.config, args.tolerance) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("config error: {e}");
            return 2;
        }
    };

    let outcome = match &cli.command {
        Command::Times(_) => commands::times::run(&run_cfg),
        Command::Asymptotic(_) => commands::asymptotic::run(&run_cfg),
        Command::TwoLevel(_) => commands::two_level::run(&run_cfg),
        Command::Arrival(_) => commands::arrival::run(&run_cfg),
        Command::WeakSim(_) => commands::weak_sim::run(&run_cfg, args.seed),
        Command::Validate(_) => commands::validate::run(&run_cfg, args.seed),
    };

    match outcome {
        Ok(CommandOutput { table, exit }) => {
            let text = table.to_csv();
            debug_assert_eq!(
                table::ResultTable::parse(&text).map(|t| t.to_csv()),
                Ok(text.clone()),
                "serialized table must round-trip losslessly"
            );
            match &args.out {
                Some(path) => {
                    if let Err(e) = fs::write(path, &text) {
                        eprintln!("config error: cannot write '{}': {e}", path.display());
                        return 2;
                    }
                }
                None => print!("{text}"),
            }
            exit
        }
        Err(CliError::Config(message)) => {
            eprintln!("config error: {message}");
            2
        }
        Err(CliError::Run { exit, message }) => {
            eprintln!("error: {message}");
            exit
        }
    }
}

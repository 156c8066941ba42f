use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use twopoint::cli::{main_with, Invocation};

/// Two-point visual driver model lane-keeping simulator.
#[derive(Debug, Parser)]
#[command(name = "twopoint", version)]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one scenario and write trajectory.csv and metrics.txt.
    Run {
        /// Scenario file; defaults apply when omitted.
        scenario: Option<PathBuf>,
        #[arg(short, long, default_value = "out")]
        out: PathBuf,
        /// Override the scenario's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run all three experiments and write a comparison table.
    Batch {
        scenario: Option<PathBuf>,
        #[arg(short, long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the built-in invariant checks.
    Selftest,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(args) => args,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let invocation = match args.command {
        Command::Run { scenario, out, seed } => Invocation::Run {
            scenario,
            out_dir: out,
            seed,
        },
        Command::Batch { scenario, out, seed } => Invocation::Batch {
            scenario,
            out_dir: out,
            seed,
        },
        Command::Selftest => Invocation::Selftest,
    };
    ExitCode::from(main_with(&invocation) as u8)
}

mod commands;
mod config;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use crate::commands::Failure;
use crate::config::{Common, RunConfig};

/// Simulate and analyse a geometric-phase C-NOT gate on a coupled spin pair.
#[derive(Debug, Parser)]
#[command(name = "aa-cnot", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Assemble the 4×4 gate and report its conditional phase and C-NOT equivalence.
    Gate,
    /// Total / dynamic / geometric phase decomposition for one input state.
    Phases,
    /// Sampled state and Bloch-vector path.
    Trajectory,
    /// Robustness sweep over one parameter (--param, --grid).
    Sweep,
    /// Control-qubit disturbance under a global rf drive (--rf, --separations).
    Selectivity,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let result = RunConfig::resolve(cli.common)
        .map_err(Failure::from)
        .and_then(|cfg| match cli.command {
            Command::Gate => commands::gate(&cfg),
            Command::Phases => commands::phases(&cfg),
            Command::Trajectory => commands::trajectory(&cfg),
            Command::Sweep => commands::sweep(&cfg),
            Command::Selectivity => commands::selectivity(&cfg),
        });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}

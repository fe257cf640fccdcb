//! `multiss`: file-based front end.
//!
//! Exit codes: 0 success, 2 bad input, 3 protocol infeasibility (missing
//! quorums, mixed epochs), 4 capacity, 64 usage.

mod commands;
mod files;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use multiss_core::Error;

pub const EXIT_INPUT: u8 = 2;
pub const EXIT_INFEASIBLE: u8 = 3;
pub const EXIT_CAPACITY: u8 = 4;
pub const EXIT_USAGE: u8 = 64;

#[derive(Debug)]
pub struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError { code: EXIT_INPUT, message: message.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Infeasible(_)
            | Error::EpochMismatch { .. }
            | Error::NoQuorum
            | Error::Unsolvable
            | Error::InsufficientShares { .. } => EXIT_INFEASIBLE,
            Error::Capacity(_) => EXIT_CAPACITY,
            _ => EXIT_INPUT,
        };
        CliError { code, message: e.to_string() }
    }
}

#[derive(Parser)]
#[command(name = "multiss", version, about = "Hierarchical secret sharing across several QKD networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Split a secret file into one share file per node.
    Deal {
        #[arg(long)]
        topology: PathBuf,
        #[arg(long)]
        secret: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Deterministic randomness; the OS generator is used otherwise.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Recover the secret from share files or share directories.
    Reconstruct {
        #[arg(long)]
        topology: PathBuf,
        #[arg(long, num_args = 1.., required = true)]
        shares: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Advance every share in a directory by one epoch.
    Refresh {
        #[arg(long)]
        topology: PathBuf,
        #[arg(long)]
        shares: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print the networks/nodes/failure thresholds.
    Thresholds {
        #[arg(long)]
        topology: PathBuf,
        /// Also enumerate the exact access structure (at most 20 nodes).
        #[arg(long)]
        oracle: bool,
    },
    /// Run an adversary scenario.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        seed: u64,
        /// Continue from and save to this state file.
        #[arg(long)]
        state: Option<PathBuf>,
    },
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Deal { topology, secret, out, seed } => commands::deal(&topology, &secret, &out, seed),
        Command::Reconstruct { topology, shares, out } => commands::reconstruct(&topology, &shares, &out),
        Command::Refresh { topology, shares, seed } => commands::refresh(&topology, &shares, seed),
        Command::Thresholds { topology, oracle } => commands::thresholds(&topology, oracle),
        Command::Simulate { scenario, seed, state } => commands::simulate(&scenario, seed, state.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("multiss: {e}");
            ExitCode::from(e.code)
        }
    }
}

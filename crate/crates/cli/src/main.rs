//! `sa-lab`: batch front door for the stochastic approximation lab.
//!
//! Exit codes are disjoint and stable: 0 success, 1 I/O failure, 2 config
//! failure (including flag parse errors), 3 certification or oracle
//! violation.

mod commands;
mod config;

use clap::{Parser, Subcommand};
use commands::OracleKind;
use std::path::PathBuf;
use std::process::ExitCode as ProcessExit;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitCode {
    Io,
    Config,
    Violation,
}

impl ExitCode {
    fn status(self) -> u8 {
        match self {
            ExitCode::Io => 1,
            ExitCode::Config => 2,
            ExitCode::Violation => 3,
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    code: ExitCode,
    message: String,
}

impl CliError {
    pub fn new(code: ExitCode, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "sa-lab",
    version,
    about = "Simulate stochastic approximation ensembles and certify drift conditions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an ensemble scenario; writes <name>.trajectories.csv,
    /// <name>.summary.json, <name>.u_vs_k.svg.
    Run {
        /// Scenario config (JSON).
        #[arg(long)]
        config: PathBuf,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads: 0 = auto, 1 = sequential. Falls back to
        /// SA_LAB_THREADS, then 0.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Sweep the decay exponent; writes <name>.phase.csv, <name>.phase.svg.
    PhaseScan {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated exponent grid, e.g. --xi 0.5,0.625,0.8,1.0;
        /// overrides the config's xi_list.
        #[arg(long, value_delimiter = ',')]
        xi: Option<Vec<f64>>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Certify a Lyapunov drift condition; writes <name>.certificate.json.
    /// Exits 3 when violations are found.
    Certify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run an inequality oracle over random inputs; exits 3 on violation.
    Oracle {
        #[arg(long, value_enum)]
        which: OracleKind,
        #[arg(long, default_value_t = 1_000_000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn resolve_threads(flag: Option<usize>) -> usize {
    flag.or_else(|| {
        std::env::var("SA_LAB_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    })
    .unwrap_or(0)
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run {
            config,
            out,
            seed,
            threads,
        } => commands::cmd_run(&config, &out, seed, resolve_threads(threads)),
        Command::PhaseScan {
            config,
            out,
            xi,
            seed,
            threads,
        } => commands::cmd_phase_scan(&config, &out, xi, seed, resolve_threads(threads)),
        Command::Certify { config, out, seed } => commands::cmd_certify(&config, &out, seed),
        Command::Oracle {
            which,
            trials,
            seed,
        } => commands::cmd_oracle(which, trials, seed),
    }
}

fn main() -> ProcessExit {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ProcessExit::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ProcessExit::from(e.code.status())
        }
    }
}

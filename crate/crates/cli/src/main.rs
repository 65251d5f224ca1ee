//! `ness`: batch front end for the steady-state, circuit and sampling tools.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use output::Format;

#[derive(Debug, Parser)]
#[command(name = "ness", version, about = "Circuits evaluated on products of boundary-driven XX steady states")]
pub struct Cli {
    /// Boundary coupling λ.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub lambda: f64,
    /// Anisotropy Δ of the Liouvillian reference model.
    #[arg(long, global = true, default_value_t = 0.0)]
    pub delta: f64,
    /// Uniform longitudinal field h of the Liouvillian reference model.
    #[arg(long, global = true, default_value_t = 0.0)]
    pub field: f64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Output file (default: $NESS_OUTPUT_DIR/<command>.<ext>, else stdout).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, env = "NESS_OUTPUT_DIR", hide_env_values = true)]
    pub output_dir: Option<PathBuf>,
    /// Require encoders to cover every site.
    #[arg(long, global = true)]
    pub strict_tiling: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the MPO steady state of one chain.
    BuildNess {
        #[arg(long)]
        length: usize,
        /// Skip the dense density matrix (needed beyond 12 sites).
        #[arg(long)]
        no_dense: bool,
    },
    /// Compare the MPO steady state with the Liouvillian null space.
    VerifyNess {
        #[arg(long)]
        length: usize,
        #[arg(long, default_value_t = 1e-8)]
        tolerance: f64,
    },
    /// Evaluate a circuit file through its encoders and check it against the statevector.
    Amplitude {
        circuit: PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        tolerance: f64,
    },
    /// Sample the measurement protocol of a circuit file.
    Sample {
        circuit: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of runs, with seeds seed, seed+1, ...
        #[arg(long, default_value_t = 1)]
        runs: usize,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Also write the exact outcome table as CSV.
        #[arg(long)]
        outcomes: Option<PathBuf>,
    },
    /// Count satisfying assignments of a function file.
    CountSat { function: PathBuf },
    /// Liouvillian spectral gap over a range of chain lengths.
    GapScan {
        #[arg(long, default_value_t = 2)]
        lmin: usize,
        #[arg(long, default_value_t = 6)]
        lmax: usize,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::BuildNess { .. } => "build-ness",
            Command::VerifyNess { .. } => "verify-ness",
            Command::Amplitude { .. } => "amplitude",
            Command::Sample { .. } => "sample",
            Command::CountSat { .. } => "count-sat",
            Command::GapScan { .. } => "gap-scan",
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(commands::Status::Passed) => ExitCode::SUCCESS,
        Ok(commands::Status::Failed(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

//! Command-line front end: reproducible RIS experiments from JSON configs.
//!
//! Exit codes: 0 success, 2 input error, 3 infeasibility, 4 numerical
//! failure.

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use ris_core::RisError;

pub mod commands;
pub mod config;

#[derive(Parser)]
#[command(
    name = "ris",
    about = "Dual-band reconfigurable-surface analysis: scattering, steering codebooks, topology optimization, circuit sweeps and measurement post-processing"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a port network and write it with its patterns.
    SynthArray {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Search steering codebooks for every configured target.
    Steer {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the constrained genetic optimization of the element topology.
    OptimizeTopology {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Sweep the spiral-inductor equivalent circuit (optionally cascaded).
    Psi {
        #[arg(long)]
        circuit: PathBuf,
        /// Second circuit to cascade with the first.
        #[arg(long)]
        cascade: Option<PathBuf>,
        #[arg(long, default_value_t = 26.0e9)]
        start_hz: f64,
        #[arg(long, default_value_t = 30.0e9)]
        stop_hz: f64,
        #[arg(long, default_value_t = 401)]
        points: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Background-subtract a measured trace pair.
    Subtract {
        #[arg(long)]
        total: PathBuf,
        #[arg(long)]
        env: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate high-band patterns under every low-band state.
    Independence {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Compute beam metrics for a pattern file.
    Metrics {
        #[arg(long)]
        pattern: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        cut_phi: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Parse arguments, run, and map errors onto the documented exit codes.
pub fn run() -> i32 {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(cli: Cli) -> ris_core::Result<()> {
    match cli.command {
        Command::SynthArray { config, out, seed } => {
            let config = config::load_config(&config, seed)?;
            commands::synth_array(&config, &out)
        }
        Command::Steer { config, out, seed } => {
            let config = config::load_config(&config, seed)?;
            commands::steer_command(&config, &out)
        }
        Command::OptimizeTopology { config, out, seed } => {
            let config = config::load_config(&config, seed)?;
            commands::optimize_topology(&config, &out)
        }
        Command::Psi {
            circuit,
            cascade,
            start_hz,
            stop_hz,
            points,
            out,
        } => commands::psi_command(&circuit, cascade.as_deref(), start_hz, stop_hz, points, &out),
        Command::Subtract { total, env, out } => commands::subtract_command(&total, &env, &out),
        Command::Independence { config, out, seed } => {
            let config = config::load_config(&config, seed)?;
            commands::independence_command(&config, &out)
        }
        Command::Metrics {
            pattern,
            cut_phi,
            out,
        } => commands::metrics_command(&pattern, cut_phi, &out),
    }
}

fn exit_code(e: &RisError) -> i32 {
    match e {
        RisError::InfeasiblePopulation { .. } => 3,
        RisError::SingularNetwork { .. } | RisError::NullField { .. } => 4,
        _ => 2,
    }
}

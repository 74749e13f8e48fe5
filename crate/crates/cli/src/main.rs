//! `thzdoa`: configuration-driven terahertz DOA simulation experiments.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::ValidationError;

/// Default output directory when neither `--out` nor the environment
/// variable is set.
pub const OUT_DIR_ENV: &str = "THZDOA_OUT_DIR";

#[derive(Parser)]
#[command(name = "thzdoa", version, about = "Terahertz pulse DOA simulation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the Monte Carlo sweep described by a config file.
    Simulate {
        config: PathBuf,
        /// Output directory (default: $THZDOA_OUT_DIR or ./out).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the config's base seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Export the wideband pseudo-spectrum of one realization.
    Spectrum {
        config: PathBuf,
        /// Output file (default: spectrum.csv in the default output dir).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit the pulse duration / half-power characterization table.
    Table1 {
        /// Output file (default: table1.csv in the default output dir).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Absorption-profile utilities.
    Medium {
        #[command(subcommand)]
        command: MediumCommand,
    },
}

#[derive(Subcommand)]
enum MediumCommand {
    /// Print range and sample statistics of a profile file.
    Inspect { file: PathBuf },
    /// Write a synthetic profile ("vacuum", "constant", or "summer-air").
    Synth {
        kind: String,
        #[arg(long)]
        out: PathBuf,
        /// Absorption coefficient for kind = "constant", 1/m.
        #[arg(long)]
        k0: Option<f64>,
        /// Band lower edge, THz.
        #[arg(long, default_value_t = 0.5)]
        band_lo_thz: f64,
        /// Band upper edge, THz.
        #[arg(long, default_value_t = 10.5)]
        band_hi_thz: f64,
    },
    /// Mole-fraction mix of profile files given as `path:fraction` parts.
    Mix {
        #[arg(long)]
        out: PathBuf,
        /// Profile parts, e.g. water.csv:0.0186 air.csv:0.9814
        #[arg(required = true)]
        parts: Vec<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate { config, out, seed } => commands::simulate(&config, out, seed),
        Command::Spectrum { config, out } => commands::spectrum(&config, out),
        Command::Table1 { out } => commands::table1(out),
        Command::Medium { command } => match command {
            MediumCommand::Inspect { file } => commands::medium_inspect(&file),
            MediumCommand::Synth {
                kind,
                out,
                k0,
                band_lo_thz,
                band_hi_thz,
            } => commands::medium_synth(&kind, &out, k0, band_lo_thz, band_hi_thz),
            MediumCommand::Mix { out, parts } => commands::medium_mix(&out, &parts),
        },
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<ValidationError>() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}

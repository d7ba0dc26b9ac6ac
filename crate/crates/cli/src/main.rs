//! nvmagsim: ensemble NV-diamond magnetometer simulator and analysis
//! toolkit.
//!
//! Exit codes: 0 success, 2 config error, 3 numerical failure (1 for
//! unexpected I/O problems).

// `!(x > 0.0)` rejects NaN along with nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;

use clap::{Parser, Subcommand};
use commands::CmdError;
use output::OutputDir;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "nvmagsim",
    version,
    about = "Ensemble NV-diamond magnetometer simulator: resonances, pulse-sequence Monte-Carlo, spectral analysis, calibration, and sensitivity budgets"
)]
struct Cli {
    /// Path to the run configuration (TOML, or JSON mirror).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override the configured random seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Override the configured acquisition count.
    #[arg(long, global = true)]
    acquisitions: Option<u32>,

    /// Analyze a single acquisition with the median correction factor.
    #[arg(long = "single-acq", global = true, default_value_t = false)]
    single_acq: bool,

    /// Machine-readable JSON on stdout.
    #[arg(long, global = true, default_value_t = false)]
    json: bool,

    /// Allow overwriting existing output files.
    #[arg(long, global = true, default_value_t = false)]
    force: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// NV Zeeman resonance table and P1 transition table.
    Resonances,
    /// Generate magnetometry acquisitions (CSV) plus a reproducibility
    /// manifest.
    Simulate,
    /// Precession-time sweep: decay trace plus fixed-p and free-p fits.
    Sweep,
    /// Sensitivity spectrum and median-based minimum sensitivity from
    /// acquisition files.
    Analyze {
        /// Acquisition CSV files (from `simulate`).
        files: Vec<PathBuf>,
    },
    /// Closed-form sensitivity and figure-of-merit report.
    Budget,
    /// Test-field calibration factor by coil geometry, fringe spacing, and
    /// simulated fringe-scan fit.
    Calibrate,
}

fn init_thread_pool() {
    if let Ok(v) = std::env::var("NVMAGSIM_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            if n >= 1 {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                    .ok();
            }
        }
    }
}

fn main() {
    let cli = Cli::parse();
    init_thread_pool();
    let code = match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.message());
            e.exit_code()
        }
    };
    std::process::exit(code);
}

fn run(cli: &Cli) -> Result<(), CmdError> {
    let loaded = {
        let path = cli.config.as_deref().ok_or_else(|| {
            CmdError::Config(anyhow::anyhow!(
                "--config PATH is required for this command"
            ))
        })?;
        config::load(path).map_err(CmdError::Config)?
    };
    let seed = cli.seed.unwrap_or(loaded.config.run.seed);
    let acquisitions = cli
        .acquisitions
        .unwrap_or(loaded.config.run.acquisitions)
        .max(1);

    match &cli.command {
        Command::Resonances => commands::resonances::run(&loaded.config, cli.json),
        Command::Simulate => {
            let out = OutputDir::new(&cli.out, cli.force).map_err(CmdError::Io)?;
            commands::simulate::run(&loaded, &out, seed, acquisitions, cli.json)
        }
        Command::Sweep => {
            let out = OutputDir::new(&cli.out, cli.force).map_err(CmdError::Io)?;
            commands::sweep::run(&loaded.config, &out, seed, cli.json)
        }
        Command::Analyze { files } => {
            let out = OutputDir::new(&cli.out, cli.force).map_err(CmdError::Io)?;
            commands::analyze::run(&loaded.config, files, &out, cli.single_acq, cli.json)
        }
        Command::Budget => commands::budget::run(&loaded.config, cli.json),
        Command::Calibrate => commands::calibrate::run(&loaded.config, seed, cli.json),
    }
}

//! `dosqpe` — run ensemble phase estimation on small Hamiltonians and
//! reconstruct sparse spectra from the measured histograms.
//!
//! Exit codes: 0 success, 2 bad input (arguments, config files, bundles),
//! 3 resource guard tripped (see `DOSQPE_MAX_QUBITS`), 4 solver
//! non-convergence.

mod commands;
mod config;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::Source;
use dosqpe_core::Error;

#[derive(Parser)]
#[command(
    name = "dosqpe",
    version,
    about = "Ensemble phase-estimation simulator with sparse spectral reconstruction"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Diagonalize the configured Hamiltonian and write spectrum.csv
    Spectrum {
        /// Experiment config (TOML)
        #[arg(long)]
        config: PathBuf,
        /// Output directory; defaults to the config's [output] dir
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Execute the phase-estimation circuit and write a result bundle
    Run {
        /// Experiment config (TOML)
        #[arg(long)]
        config: PathBuf,
        /// Bundle directory; defaults to the config's [output] dir
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the configured shot budget (0 = exact mode, no counts)
        #[arg(long)]
        shots: Option<u64>,
        /// Override the configured sampling seed
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Recover spectral lines and degeneracies from a bundle's histogram
    Reconstruct {
        /// Result bundle directory written by `run`
        bundle: PathBuf,
        /// Experiment config; defaults to the one embedded in the bundle
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory; defaults to the bundle
        #[arg(long)]
        out: Option<PathBuf>,
        /// Histogram to use; defaults to counts when present, else exact
        #[arg(long, value_enum)]
        from: Option<Source>,
    },
    /// Score an estimate against the exact spectrum (1-Wasserstein)
    Compare {
        /// Result bundle directory written by `run`
        bundle: PathBuf,
        /// Experiment config; defaults to the one embedded in the bundle
        #[arg(long)]
        config: Option<PathBuf>,
        /// Estimate CSV; defaults to estimate.csv inside the bundle
        #[arg(long)]
        estimate: Option<PathBuf>,
        /// Output directory for compare.txt; defaults to the bundle
        #[arg(long)]
        out: Option<PathBuf>,
        /// Histogram to use; defaults to counts when present, else exact
        #[arg(long, value_enum)]
        from: Option<Source>,
    },
    /// Render a bundle histogram as an SVG bar chart
    Plot {
        /// Result bundle directory written by `run`
        bundle: PathBuf,
        /// Experiment config for the exact-spectrum overlay
        #[arg(long)]
        config: Option<PathBuf>,
        /// Estimate CSV for markers; defaults to estimate.csv when present
        #[arg(long)]
        estimate: Option<PathBuf>,
        /// Output directory for histogram.svg; defaults to the bundle
        #[arg(long)]
        out: Option<PathBuf>,
        /// Histogram to use; defaults to counts when present, else exact
        #[arg(long, value_enum)]
        from: Option<Source>,
    },
}

fn dispatch(cli: Cli) -> dosqpe_core::Result<()> {
    match cli.command {
        Command::Spectrum { config, out } => commands::cmd_spectrum(&config, out.as_deref()),
        Command::Run {
            config,
            out,
            shots,
            seed,
        } => commands::cmd_run(&config, out.as_deref(), shots, seed),
        Command::Reconstruct {
            bundle,
            config,
            out,
            from,
        } => commands::cmd_reconstruct(&bundle, config.as_deref(), out.as_deref(), from),
        Command::Compare {
            bundle,
            config,
            estimate,
            out,
            from,
        } => commands::cmd_compare(
            &bundle,
            config.as_deref(),
            estimate.as_deref(),
            out.as_deref(),
            from,
        ),
        Command::Plot {
            bundle,
            config,
            estimate,
            out,
            from,
        } => commands::cmd_plot(
            &bundle,
            config.as_deref(),
            estimate.as_deref(),
            out.as_deref(),
            from,
        ),
    }
}

fn exit_code(error: &Error) -> u8 {
    match error {
        Error::ResourceLimit(_) => 3,
        Error::Numerical(_) => 4,
        _ => 2,
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

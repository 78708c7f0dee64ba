//! Experiment harness for tandem detection: sweeps over quantizer sizes,
//! divergence tables, Monte Carlo runs, iid exponent tables and a self-test.
//!
//! The `tandem` binary is a thin wrapper over [`run`].

pub mod commands;
pub mod config;
pub mod report;
pub mod selftest;

use std::path::PathBuf;

use anyhow::Result;
use clap::{Parser, Subcommand};

pub use commands::Status;
pub use config::{ExperimentConfig, OutputFormat, Overrides};

/// Environment variable that caps the worker thread count.
pub const THREADS_ENV: &str = "TANDEM_THREADS";

#[derive(Debug, Parser)]
#[command(name = "tandem", version, about = "Tandem detection experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// JSON config file; built-in defaults when absent.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Monte Carlo seed (overrides the config).
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Output format (overrides the config).
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,

    /// Output file (overrides the config); standard output otherwise.
    #[arg(long, global = true, value_name = "PATH")]
    pub output: Option<PathBuf>,

    /// Monte Carlo samples per k (overrides the config; 0 disables in `sweep`).
    #[arg(long, global = true)]
    pub mc_samples: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Chernoff information and Bayes error for every k in the config.
    Sweep {
        /// Exit with status 2 unless both monotonicity flags hold.
        #[arg(long)]
        check: bool,
    },
    /// Symbol and node divergences for every k in the config.
    Chernoff,
    /// Monte Carlo error estimates only.
    Simulate,
    /// Bayes error of n iid copies of node 1's symbol, n = 1..=n_max.
    Exponent {
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..))]
        k: u64,
        #[arg(long, default_value_t = 12, value_parser = clap::value_parser!(u64).range(1..))]
        n_max: u64,
    },
    /// Built-in oracle comparisons.
    Selftest,
}

/// Applies the optional thread cap from [`THREADS_ENV`].
pub fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize =
        raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
            anyhow::anyhow!("{THREADS_ENV} must be a positive integer, got {raw:?}")
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()?;
    Ok(())
}

pub fn run(cli: Cli) -> Result<Status> {
    if let Command::Selftest = cli.command {
        return commands::selftest();
    }
    let overrides = Overrides {
        seed: cli.seed,
        format: cli.format,
        output: cli.output,
        mc_samples: cli.mc_samples,
    };
    let config = ExperimentConfig::resolve(cli.config.as_deref(), &overrides)?;
    match cli.command {
        Command::Sweep { check } => commands::sweep(&config, check),
        Command::Chernoff => commands::chernoff(&config),
        Command::Simulate => commands::simulate(&config),
        Command::Exponent { k, n_max } => commands::exponent(&config, k as usize, n_max as usize),
        Command::Selftest => unreachable!("handled above"),
    }
}

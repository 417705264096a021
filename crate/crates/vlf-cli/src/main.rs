//! `vlf` — vessel location forecasting over federated AIS silos.
//!
//! One JSON config describes a run; each subcommand reads the sections it
//! needs and writes its artifacts into the configured output directory,
//! alongside a manifest recording the effective config hash and seed.
//! Every subcommand is deterministic for a fixed config and seed.

mod cmd;
mod config;
mod data;
mod error;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use error::CliError;

#[derive(Parser)]
#[command(
    name = "vlf",
    version,
    about = "Vessel location forecasting over federated AIS silos",
    after_help = "Environment:\n  VLF_WORKERS  worker threads for data-parallel stages (default: all cores)"
)]
struct Cli {
    /// JSON run config; built-in defaults apply when omitted.
    #[arg(short, long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Output directory, overriding the config.
    #[arg(long, global = true, value_name = "DIR")]
    out_dir: Option<PathBuf>,
    /// Master seed, overriding the config.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and clean a raw AIS CSV into trajectories plus corpus stats.
    Preprocess,
    /// Train one model on a cleaned trajectory file.
    Train,
    /// Run the federation over the configured silos, then personalize each.
    Federate,
    /// Fine-tune an existing global model on each configured silo.
    Personalize {
        /// Serialized global model to start from.
        #[arg(long, value_name = "FILE")]
        model: PathBuf,
    },
    /// Score a model on a cleaned trajectory file.
    Evaluate {
        /// Serialized model to score.
        #[arg(long, value_name = "FILE")]
        model: PathBuf,
        /// Standardizer JSON saved by the training run.
        #[arg(long, value_name = "FILE")]
        standardizer: PathBuf,
    },
    /// Compare centralized vs federated transfer volume.
    Commcost,
    /// Write a density map of label displacements for each silo.
    Diagnose,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Preprocess => "preprocess",
            Command::Train => "train",
            Command::Federate => "federate",
            Command::Personalize { .. } => "personalize",
            Command::Evaluate { .. } => "evaluate",
            Command::Commcost => "commcost",
            Command::Diagnose => "diagnose",
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("vlf: {e}");
        std::process::exit(e.exit_code());
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    init_workers()?;
    let mut cfg = config::load(cli.config.as_deref())?;
    if let Some(dir) = cli.out_dir {
        cfg.out_dir = dir;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    // The master seed drives every stochastic choice of the run; the
    // per-section seeds exist only inside the library types.
    cfg.train.seed = cfg.seed;
    cfg.fed.train.seed = cfg.seed;

    std::fs::create_dir_all(&cfg.out_dir)
        .map_err(|e| CliError::Io(format!("creating {}: {e}", cfg.out_dir.display())))?;
    config::write_manifest(cli.command.name(), &cfg)?;

    match cli.command {
        Command::Preprocess => cmd::preprocess(&cfg),
        Command::Train => cmd::train(&cfg),
        Command::Federate => cmd::federate(&cfg),
        Command::Personalize { model } => cmd::personalize(&cfg, &model),
        Command::Evaluate { model, standardizer } => cmd::evaluate(&cfg, &model, &standardizer),
        Command::Commcost => cmd::commcost(&cfg),
        Command::Diagnose => cmd::diagnose(&cfg),
    }
}

/// Honors VLF_WORKERS by sizing the global worker pool before any parallel
/// stage runs. Results do not depend on the worker count; only wall time
/// does.
fn init_workers() -> Result<(), CliError> {
    let value = match std::env::var("VLF_WORKERS") {
        Err(std::env::VarError::NotPresent) => return Ok(()),
        Err(e) => return Err(CliError::Config(format!("VLF_WORKERS: {e}"))),
        Ok(v) => v,
    };
    let n: usize = value
        .trim()
        .parse()
        .map_err(|_| CliError::Config(format!("VLF_WORKERS must be a positive integer, got '{value}'")))?;
    if n == 0 {
        return Err(CliError::Config("VLF_WORKERS must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("worker pool: {e}")))
}

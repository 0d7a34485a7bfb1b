//! `mre`: simulate displacement data, reconstruct shear modulus, evaluate
//! and export results.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::error::{exit, CliError};

#[derive(Debug, Parser)]
#[command(name = "mre", version, about = "Elastography wave simulation and shear-modulus reconstruction")]
struct Cli {
    /// Pipeline configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides `simulate.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; falls back to MRE_SOLVE_THREADS, then all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Forward-simulate a phantom and write the dataset and manifest.
    Simulate,
    /// Reconstruct the modulus from a dataset manifest.
    Reconstruct,
    /// Compare a reconstruction against the ground truth.
    Evaluate,
    /// Write a slice of a scalar volume as PGM images and CSV.
    Export,
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>, CliError> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var("MRE_SOLVE_THREADS") {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::Config(format!("MRE_SOLVE_THREADS must be a positive integer, got {v:?}"))),
        Err(_) => Ok(None),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = thread_count(cli.threads)? {
        if n == 0 {
            return Err(CliError::Config("thread count must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot start thread pool: {e}")))?;
    }
    let config_path = cli
        .config
        .ok_or_else(|| CliError::Config("--config PATH is required".into()))?;
    let cfg = config::load(&config_path)?;
    let base = config_path.parent().map(|p| p.to_path_buf()).unwrap_or_default();
    std::fs::create_dir_all(&cli.out)?;
    let ctx = commands::Context {
        config: cfg,
        base,
        out: cli.out,
        seed: cli.seed,
    };
    let name = match cli.command {
        Command::Simulate => "simulate",
        Command::Reconstruct => "reconstruct",
        Command::Evaluate => "evaluate",
        Command::Export => "export",
    };
    std::fs::copy(&config_path, ctx.out.join(format!("{name}.config.toml")))?;
    match cli.command {
        Command::Simulate => commands::simulate(&ctx),
        Command::Reconstruct => commands::reconstruct(&ctx),
        Command::Evaluate => commands::evaluate(&ctx),
        Command::Export => commands::export(&ctx),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::USAGE as u8 } else { exit::SUCCESS as u8 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::from(exit::SUCCESS as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

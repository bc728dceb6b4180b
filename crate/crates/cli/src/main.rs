//! `djc`: verify codes, compile circuits, run trajectory ensembles and check
//! preparation/readout. Each subcommand reads one JSON config and writes its
//! outputs to `--out`.
//!
//! Exit codes: 0 success, 1 verification failure (or a runtime error), 2 config error.

mod commands;
mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;

use config::{load, CompileConfig, ConfigError, PrepCheckConfig, SimulateConfig, VerifyConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] djc::DjcError),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Core(_) => 1,
        }
    }
}

#[derive(Parser, Debug)]
#[command(version, about = "Detected-jump-correcting code toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug)]
struct Common {
    /// JSON config for the subcommand.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's seed (default 0).
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the code: DFS membership, error-correction condition, rate, generator algebra.
    Verify(Common),
    /// Compile a logical circuit into a pulse schedule and verify it.
    Compile(Common),
    /// Run a seeded trajectory ensemble under spontaneous emission.
    Simulate(Common),
    /// Prepare the pair ground state and optionally read it out.
    PrepCheck(Common),
}

fn run(cmd: &Command) -> Result<commands::Outcome, CliError> {
    match cmd {
        Command::Verify(c) => {
            let cfg: VerifyConfig = load(&c.config)?;
            let base = c.config.parent().unwrap_or(Path::new("."));
            commands::verify(&cfg, base, &c.out)
        }
        Command::Compile(c) => commands::compile(&load::<CompileConfig>(&c.config)?, &c.out),
        Command::Simulate(c) => {
            let cfg: SimulateConfig = load(&c.config)?;
            let seed = c.seed.or(cfg.seed).unwrap_or(0);
            commands::simulate(&cfg, seed, &c.out)
        }
        Command::PrepCheck(c) => {
            let cfg: PrepCheckConfig = load(&c.config)?;
            let seed = c.seed.or(cfg.seed).unwrap_or(0);
            commands::prep_check(&cfg, seed, &c.out)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(o) if o.passed => ExitCode::SUCCESS,
        Ok(_) => {
            eprintln!("verification failed; see report.json");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

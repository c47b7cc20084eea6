//! The `alf-entropy` command line: `spin`, `fermion` and `verify`.

pub mod config;
pub mod fermion;
pub mod spin;
pub mod table;
pub mod verify;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use config::{ExperimentConfig, Flags, Mode, OracleMode, PartitionSource, OUT_DIR_ENV};
pub use fermion::run_fermion;
pub use spin::run_spin;
pub use table::{Cell, Format, ResultTable};
pub use verify::run_verify;

use crate::error::{AlfError, Result};

#[derive(Debug, Parser)]
#[command(
    name = "alf-entropy",
    version,
    about = "ALF entropy of shifts on spin and Fermion chains"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Refined correlation entropies of the shift on a product spin chain
    Spin(Flags),
    /// Markov reduction of the gauge-invariant Fermion partition, M = 2..=M
    Fermion(Flags),
    /// Run the built-in self-check suites
    Verify(Flags),
}

impl Command {
    pub fn mode(&self) -> Mode {
        match self {
            Command::Spin(_) => Mode::Spin,
            Command::Fermion(_) => Mode::Fermion,
            Command::Verify(_) => Mode::Verify,
        }
    }

    pub fn flags(&self) -> &Flags {
        match self {
            Command::Spin(f) | Command::Fermion(f) | Command::Verify(f) => f,
        }
    }
}

pub fn run(config: &ExperimentConfig) -> Result<ResultTable> {
    match config.mode {
        Mode::Spin => run_spin(config),
        Mode::Fermion => run_fermion(config),
        Mode::Verify => run_verify(config),
    }
}

/// Outcome of one invocation.
#[derive(Debug)]
pub struct RunReport {
    pub table: ResultTable,
    pub written_to: Option<PathBuf>,
    pub rendered: String,
}

/// Resolves the configuration, runs the command and writes the result to
/// the configured file. Without an output path the rendered text is left
/// for the caller to print.
pub fn execute(cli: &Cli) -> Result<RunReport> {
    let env_dir = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from);
    let config = ExperimentConfig::resolve(cli.command.mode(), cli.command.flags(), env_dir.as_deref())?;
    let table = run(&config)?;
    let rendered = table.render(config.format);
    if let Some(path) = &config.output_path {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| AlfError::Io(format!("{}: {e}", dir.display())))?;
        }
        std::fs::write(path, &rendered).map_err(|e| AlfError::Io(format!("{}: {e}", path.display())))?;
    }
    Ok(RunReport {
        table,
        written_to: config.output_path,
        rendered,
    })
}

//! Config-driven runs of the molbit simulator and their CSV outputs.

pub mod commands;
pub mod config;
pub mod output;

use std::path::Path;

use clap::ValueEnum;
use thiserror::Error;

use config::RunConfig;
use output::{OutputSet, RunManifest};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl From<molbit_core::Error> for CliError {
    fn from(e: molbit_core::Error) -> Self {
        match e {
            molbit_core::Error::InvalidArgument(_) => CliError::Config(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Spectrum,
    Relaxation,
    Protocol,
    Align,
    Chart,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Relaxation => "relaxation",
            Command::Protocol => "protocol",
            Command::Align => "align",
            Command::Chart => "chart",
        }
    }
}

/// Runs one command and writes its files plus the manifest into `dir`.
pub fn run(cmd: Command, cfg: &RunConfig, dir: &Path) -> Result<RunManifest, CliError> {
    let mut out = OutputSet::new(dir);
    match cmd {
        Command::Spectrum => commands::spectrum(cfg, &mut out)?,
        Command::Relaxation => commands::relaxation(cfg, &mut out)?,
        Command::Protocol => {
            commands::protocol(cfg, &mut out)?;
        }
        Command::Align => {
            commands::align(cfg, &mut out)?;
        }
        Command::Chart => commands::chart(cfg, &mut out)?,
    }
    out.finish(cmd.name(), cfg)
}

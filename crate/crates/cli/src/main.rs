use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use molbit_cli::config::RunConfig;
use molbit_cli::{run, CliError, Command};

/// Spin-model simulations of a molecular-magnet bit.
#[derive(Debug, Parser)]
#[command(name = "simulate", version)]
struct Args {
    command: Command,
    /// JSON config; built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; falls back to output.directory in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Replace one config entry, e.g. environment.temperature_k=2.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Write the effective config to stdout and exit.
    #[arg(long)]
    print_config: bool,
}

/// Caps the worker pool at SIMULATE_THREADS when it is set.
fn init_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("SIMULATE_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::Config(format!(
            "SIMULATE_THREADS must be a positive integer, got `{raw}`"
        ))
    })?;
    let avail = std::thread::available_parallelism().map_or(1, |n| n.get());
    rayon::ThreadPoolBuilder::new()
        .num_threads(n.min(avail))
        .build_global()
        .map_err(|e| CliError::Config(e.to_string()))
}

fn main_inner(args: Args) -> Result<(), CliError> {
    init_threads()?;
    let base = match &args.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let cfg = base.with_overrides(&args.overrides)?;
    if args.print_config {
        println!("{}", cfg.to_json());
        return Ok(());
    }
    let dir = args
        .out
        .clone()
        .or_else(|| cfg.output.directory.clone())
        .ok_or_else(|| CliError::Config("no output directory: pass --out".into()))?;
    let manifest = run(args.command, &cfg, &dir)?;
    for f in &manifest.files {
        println!("{}  {}", f.sha256, dir.join(&f.name).display());
    }
    Ok(())
}

fn main() -> ExitCode {
    match main_inner(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("simulate: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

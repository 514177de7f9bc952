//! `distrisk`: generators, MEMM, price bounds, polytope sampling and
//! pentanomial calibration from a JSON run configuration.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::{Overrides, RunConfig};
use crate::error::CliResult;
use crate::output::OutDir;

#[derive(Parser)]
#[command(name = "distrisk", version, about = "Distribution model risk on multinomial lattices")]
struct Cli {
    /// JSON run configuration
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,

    /// Output directory for artifacts and manifest.json
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Log progress (repeat for debug output)
    #[arg(long, short, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(flatten)]
    overrides: Overrides,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Extremal generators of the risk-neutral polytope with their option prices
    Generators,
    /// Minimal entropy martingale measure for the historical probabilities
    Memm,
    /// Call and put bounds, MEMM prices and the no-arbitrage envelope per maturity
    Bounds,
    /// Uniform samples of the risk-neutral polytope with prices and entropies
    Sample,
    /// Pentanomial lattice from return moments
    Calibrate,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Generators => "generators",
            Command::Memm => "memm",
            Command::Bounds => "bounds",
            Command::Sample => "sample",
            Command::Calibrate => "calibrate",
        }
    }
}

fn run(cli: &Cli) -> CliResult<()> {
    let base = match &cli.config {
        Some(path) => {
            let dir = path.parent().map(PathBuf::from).unwrap_or_default();
            RunConfig::load(path)?.rebase(&dir)
        }
        None => RunConfig::default(),
    };
    let cfg = base.apply(&cli.overrides);
    let mut out = OutDir::create(&cli.out)?;
    match cli.command {
        Command::Generators => commands::generators(&cfg, &mut out)?,
        Command::Memm => commands::memm(&cfg, &mut out)?,
        Command::Bounds => commands::bounds(&cfg, &mut out)?,
        Command::Sample => commands::sample(&cfg, &mut out)?,
        Command::Calibrate => commands::calibrate(&cfg, &mut out)?,
    }
    out.finish(cli.command.name(), &cfg)?;
    log::info!("artifacts written to {}", cli.out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

//! Command-line front end: runs the model-building pipeline stage by stage
//! from a TOML run configuration.

pub mod artifacts;
pub mod commands;
pub mod config;
pub mod error;
pub mod gen;
pub mod svg;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::commands::Ctx;
use crate::config::Overrides;
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "fuelmodel", version, about = "Build and validate reduced fuel-rate models")]
pub struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true, default_value = "fuelmodel.toml")]
    pub config: PathBuf,
    /// Output directory, overriding `output_dir`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Speed unit of the cycle files: mps, kph or mph.
    #[arg(long, global = true)]
    pub unit: Option<String>,
    /// Simulation and comparison step, s.
    #[arg(long, global = true)]
    pub dt: Option<f64>,
    /// Also write SVG charts of the comparisons.
    #[arg(long, global = true)]
    pub svg: bool,
    /// Only print errors.
    #[arg(long, short, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Drive the configured cycles through the reference powertrain.
    Simulate,
    /// Extract maps and constants from the simulated runs.
    Extract,
    /// Assemble the semi-principled model.
    FitSemi,
    /// Fit the simplified polynomial model to the semi-principled one.
    FitSimplified,
    /// Process dynamometer logs into speed and acceleration profiles.
    Ingest,
    /// Compare models with the reference runs and write reports.
    Validate,
    /// All stages in order.
    Pipeline,
    /// Regenerate the example data set.
    #[command(hide = true)]
    GenData {
        #[arg(long)]
        dir: PathBuf,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    if let Command::GenData { dir, seed } = &cli.command {
        return gen::generate(dir, *seed);
    }
    let unit = cli
        .unit
        .as_deref()
        .map(str::parse)
        .transpose()
        .map_err(|e: fuelmodel::units::UnknownUnit| CliError::Config(e.to_string()))?;
    let overrides = Overrides {
        out: cli.out.clone(),
        unit,
        dt: cli.dt,
    };
    let loaded = config::load(&cli.config, &overrides)?;
    let mut ctx = Ctx::new(loaded);
    ctx.cfg.svg |= cli.svg;
    ctx.verbose = !cli.quiet;
    match cli.command {
        Command::Simulate => commands::simulate(&ctx),
        Command::Extract => commands::extract(&ctx),
        Command::FitSemi => commands::fit_semi(&ctx),
        Command::FitSimplified => commands::fit_simplified_cmd(&ctx),
        Command::Ingest => commands::ingest(&ctx),
        Command::Validate => commands::validate(&ctx),
        Command::Pipeline => commands::pipeline(&ctx),
        Command::GenData { .. } => unreachable!("handled above"),
    }
}

//! `ergodic`: coefficient precomputation, exploration runs, strategy
//! comparisons and timing benchmarks. Every run writes delimited text files
//! and a replayable `manifest.toml` into its output directory.

mod cmd;
mod config;
mod error;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::{Config, Overrides};
use crate::error::CliError;
use crate::manifest::Run;

#[derive(Parser)]
#[command(name = "ergodic", version, about = "Tensor-train ergodic exploration")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// TOML config file; a previous run's manifest.toml works too.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every random choice in the run.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (default `out`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Coefficient cache directory (default `<out>/cache`).
    #[arg(long, global = true)]
    cache: Option<PathBuf>,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Precompute and cache the coefficient tensors; print ranks and sizes.
    Coeffs,
    /// Run the exploration loop and write trajectory, metric and occupancy.
    Explore,
    /// Target-reach suite over all strategies plus the re-initialization series.
    Compare,
    /// Per-step and preprocessing timings against dimension.
    Bench,
    /// Explore position and orientation from a pose dataset or a synthetic mixture.
    PoseExplore,
}

impl Cmd {
    fn name(self) -> &'static str {
        match self {
            Cmd::Coeffs => "coeffs",
            Cmd::Explore => "explore",
            Cmd::Compare => "compare",
            Cmd::Bench => "bench",
            Cmd::PoseExplore => "pose-explore",
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let ov = Overrides { seed: cli.seed, out: cli.out.clone(), cache: cli.cache.clone() };
    let cfg = Config::load(cli.config.as_deref(), &ov)?;
    let run = Run::new(cfg, cli.cmd.name(), cli.config.clone())?;
    match cli.cmd {
        Cmd::Coeffs => cmd::coeffs::run(&run)?,
        Cmd::Explore => cmd::explore::run(&run)?,
        Cmd::Compare => cmd::compare::run(&run)?,
        Cmd::Bench => cmd::bench::run(&run)?,
        Cmd::PoseExplore => cmd::pose::run(&run)?,
    }
    let m = run.write_manifest()?;
    println!("manifest {}", m.display());
    Ok(())
}

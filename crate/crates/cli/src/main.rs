//! `ssmtsp`: generate instances, train predictors, benchmark the search
//! variants, sweep the inflation parameters, export traces and check the
//! savings bounds.
//!
//! Exit codes: 0 on success, 2 when a validation check fails, 1 on any other
//! error.

mod commands;
mod config;
mod corpus;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::{bench, gen, sweep, trace, train, verify, ValidationFailure};
use crate::config::Config;

#[derive(Debug, Parser)]
#[command(
    name = "ssmtsp",
    version,
    about = "Shortest paths to many targets with learned predictions"
)]
struct Cli {
    /// JSON file mirroring the long flags; flags given on the command line win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for instance-parallel work.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Base seed for every random choice.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate accepted instances, their manifests and trace datasets.
    Gen(gen::GenArgs),
    /// Fit a predictor on a generated training set.
    Train(train::TrainArgs),
    /// Average operation counts of every search variant.
    Bench(bench::BenchArgs),
    /// Mean queue work over a grid of (alpha, beta).
    Sweep(sweep::SweepArgs),
    /// Per-iteration queue sizes of selected variants on one instance.
    Trace(trace::TraceArgs),
    /// Monte-Carlo checks of the savings bounds.
    Verify(verify::VerifyArgs),
}

/// Settings shared by all commands after layering flags over the config file.
pub struct Global {
    pub config: Config,
    pub seed: u64,
    pub jobs: usize,
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let config = Config::load(cli.config.as_deref())?;
    let top = config::Layer {
        cfg: &config,
        section: "",
    };
    let seed = top.pick(cli.seed, "seed", 1)?;
    let jobs = top.pick(cli.jobs, "jobs", 1)?;
    anyhow::ensure!(jobs >= 1, "--jobs must be at least 1");
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build_global()?;
    let global = Global { config, seed, jobs };
    match cli.command {
        Command::Gen(a) => gen::run(a, &global),
        Command::Train(a) => train::run(a, &global),
        Command::Bench(a) => bench::run(a, &global),
        Command::Sweep(a) => sweep::run(a, &global),
        Command::Trace(a) => trace::run(a, &global),
        Command::Verify(a) => verify::run(a, &global),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<ValidationFailure>() => {
            eprintln!("validation failed: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

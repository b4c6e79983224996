//! Command line front end: ingest detection dumps, estimate per-image
//! hardness, and write plot-ready CSV tables with JSON sidecars.

pub mod args;
mod commands;
mod output;

use anyhow::{Context, Result};

pub use args::{Cli, Command};

pub fn run(cli: Cli) -> Result<()> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build()
        .context("cannot start worker pool")?;
    pool.install(|| match &cli.command {
        Command::Rank(a) => commands::rank(a),
        Command::Classify(a) => commands::classify(a),
        Command::Evaluate(a) => commands::evaluate(a),
        Command::Correlate(a) => commands::correlate(a),
        Command::Sensitivity(a) => commands::sensitivity(a),
        Command::Diagnostics(a) => commands::diagnostics(a),
        Command::Match(a) => commands::matching(a),
        Command::Synth(a) => commands::synth(a),
    })
}

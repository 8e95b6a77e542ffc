//! `fedrec`: synthetic worlds, crawling, recommendation and evaluation from
//! the command line.

mod commands;
mod config;
mod error;

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use commands::{evaluate, interleave, recommend, report, sample, stats, synth};
use config::Common;
use error::CliError;

#[derive(Parser, Debug)]
#[command(
    name = "fedrec",
    version,
    about = "Who-to-follow experiments on federated follow graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic t1/t2 snapshot pair.
    Synth(synth::SynthArgs),
    /// Crawl a simulated federation with MHRW or an ego walk.
    Sample(sample::SampleArgs),
    /// Structural statistics of an edge list.
    Stats(stats::StatsArgs),
    /// Ranked recommendations for one system.
    Recommend(recommend::RecommendArgs),
    /// Offline evaluation on a snapshot pair.
    Evaluate(evaluate::EvaluateArgs),
    /// Balanced interleaving of two rankings and click attribution.
    Interleave(interleave::InterleaveArgs),
    /// Render a p@k curve as SVG.
    Report(report::ReportArgs),
}

fn go<T: Serialize>(
    common: &Common,
    cfg: Result<T, CliError>,
    run: fn(&T) -> Result<(), CliError>,
) -> Result<(), CliError> {
    let cfg = cfg?;
    if common.print_config {
        print!("{}", config::to_toml(&cfg));
        return Ok(());
    }
    run(&cfg)
}

fn dispatch(cmd: &Command) -> Result<(), CliError> {
    match cmd {
        Command::Synth(a) => go(&a.common, synth::resolve(a), synth::run),
        Command::Sample(a) => go(&a.common, sample::resolve(a), sample::run),
        Command::Stats(a) => go(&a.common, stats::resolve(a), stats::run),
        Command::Recommend(a) => go(&a.common, recommend::resolve(a), recommend::run),
        Command::Evaluate(a) => go(&a.common, evaluate::resolve(a), evaluate::run),
        Command::Interleave(a) => go(&a.common, interleave::resolve(a), interleave::run),
        Command::Report(a) => go(&a.common, report::resolve(a), report::run),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match dispatch(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fedrec: {e}");
            ExitCode::from(e.code())
        }
    }
}

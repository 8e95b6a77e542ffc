use std::path::PathBuf;

use clap::Args;
use fedrec::stats::{compute_stats_with, AssortativityMode};
use serde::{Deserialize, Serialize};

use super::{read_graph_visited, write_file};
use crate::config::{overlay, require, Common};
use crate::error::{data, usage, CliError};

#[derive(Args, Debug)]
pub struct StatsArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Sample manifest or key list marking the visited nodes.
    #[arg(long)]
    pub visited: Option<PathBuf>,
    /// out-in, out-out, in-in, in-out or undirected.
    #[arg(long)]
    pub assortativity: Option<String>,
    /// Row label of the table.
    #[arg(long)]
    pub label: Option<String>,
    /// Destination of the key=value document.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StatsRun {
    pub graph: Option<PathBuf>,
    pub visited: Option<PathBuf>,
    pub assortativity: String,
    pub label: String,
    pub out: Option<PathBuf>,
}

impl Default for StatsRun {
    fn default() -> Self {
        StatsRun {
            graph: None,
            visited: None,
            assortativity: AssortativityMode::default().name().to_owned(),
            label: "graph".to_owned(),
            out: None,
        }
    }
}

pub fn resolve(args: &StatsArgs) -> Result<StatsRun, CliError> {
    let mut cfg: StatsRun = crate::config::load(args.common.config.as_deref())?;
    overlay!(cfg, args, graph, visited, assortativity, label, out);
    Ok(cfg)
}

pub fn run(cfg: &StatsRun) -> Result<(), CliError> {
    let mode = AssortativityMode::ALL
        .into_iter()
        .find(|m| m.name() == cfg.assortativity)
        .ok_or_else(|| {
            let names: Vec<_> = AssortativityMode::ALL.iter().map(|m| m.name()).collect();
            usage(format!(
                "unknown assortativity mode {:?}; expected one of {}",
                cfg.assortativity,
                names.join(", ")
            ))
        })?;
    let g = read_graph_visited(require(&cfg.graph, "graph")?, cfg.visited.as_deref())?;
    let stats = compute_stats_with(&g, mode).map_err(data)?;
    print!("{}", stats.to_table(&cfg.label));
    if stats.assortativity_degenerate {
        eprintln!("warning: degree variance is zero; assortativity reported as 0");
    }
    if let Some(out) = &cfg.out {
        write_file(out, stats.to_key_value().as_bytes())?;
    }
    Ok(())
}

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;
use fedrec::ppr::WalkView;
use fedrec::rank::RankedRecord;
use fedrec::seed::derive_seed;
use fedrec::{
    Bm25Params, CfRecommender, DirectedGraph, PprConfig, PprRecommender, ProfileStrategy,
    RandomRecommender, Recommender,
};
use serde::{Deserialize, Serialize};

use super::{read_graph_visited, write_file};
use crate::config::{overlay, require, Common};
use crate::error::{data, usage, CliError};

pub const SYSTEM_NAMES: [&str; 5] = [
    "random",
    "cf:following",
    "cf:followers",
    "cf:combined",
    "ppr",
];

/// Parameters shared by every recommender.
#[derive(Args, Debug, Clone, Default)]
pub struct SystemArgs {
    #[arg(long)]
    pub k1: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub damping: Option<f64>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long)]
    pub max_iterations: Option<usize>,
    /// directed or undirected transitions for PPR.
    #[arg(long)]
    pub view: Option<String>,
    /// Drop users the target already follows from the candidates (default true).
    #[arg(long)]
    pub exclude_followees: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemParams {
    pub k1: f64,
    pub b: f64,
    pub damping: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub view: String,
    pub exclude_followees: bool,
}

impl Default for SystemParams {
    fn default() -> Self {
        let bm = Bm25Params::default();
        let ppr = PprConfig::default();
        SystemParams {
            k1: bm.k1,
            b: bm.b,
            damping: ppr.damping,
            tolerance: ppr.tolerance,
            max_iterations: ppr.max_iterations,
            view: "directed".to_owned(),
            exclude_followees: true,
        }
    }
}

impl SystemParams {
    pub fn overlay(&mut self, a: &SystemArgs) {
        overlay!(
            self,
            a,
            k1,
            b,
            damping,
            tolerance,
            max_iterations,
            view,
            exclude_followees
        );
    }

    fn ppr_config(&self) -> Result<PprConfig, CliError> {
        let view = match self.view.as_str() {
            "directed" => WalkView::Directed,
            "undirected" => WalkView::Undirected,
            other => {
                return Err(usage(format!(
                    "unknown view {other:?}; expected directed or undirected"
                )))
            }
        };
        if !(self.damping > 0.0 && self.damping < 1.0) {
            return Err(usage(format!(
                "damping must lie in (0, 1), got {}",
                self.damping
            )));
        }
        Ok(PprConfig {
            damping: self.damping,
            tolerance: self.tolerance,
            max_iterations: self.max_iterations,
            view,
        })
    }

    /// The subset of parameters a given system reads, echoed into outputs.
    pub fn echo(&self, system: &str) -> serde_json::Value {
        match system {
            "random" => serde_json::json!({ "exclude_followees": self.exclude_followees }),
            "ppr" => serde_json::json!({
                "damping": self.damping,
                "tolerance": self.tolerance,
                "max_iterations": self.max_iterations,
                "view": self.view,
                "exclude_followees": self.exclude_followees,
            }),
            _ => {
                serde_json::json!({ "k1": self.k1, "b": self.b, "exclude_followees": self.exclude_followees })
            }
        }
    }
}

pub fn unknown_system(name: &str) -> CliError {
    usage(format!(
        "unknown system {name:?}; valid systems: {}",
        SYSTEM_NAMES.join(", ")
    ))
}

pub fn build_system<'g>(
    name: &str,
    g: &'g DirectedGraph,
    p: &SystemParams,
) -> Result<Box<dyn Recommender + 'g>, CliError> {
    if name == "random" {
        let mut r = RandomRecommender::new(g);
        r.exclude_followees = p.exclude_followees;
        return Ok(Box::new(r));
    }
    if name == "ppr" {
        let mut r = PprRecommender::new(g, p.ppr_config()?);
        r.exclude_followees = p.exclude_followees;
        return Ok(Box::new(r));
    }
    let strategy = name
        .strip_prefix("cf:")
        .and_then(ProfileStrategy::parse)
        .ok_or_else(|| unknown_system(name))?;
    let mut r = CfRecommender::new(g, strategy, Bm25Params { k1: p.k1, b: p.b });
    r.exclude_followees = p.exclude_followees;
    Ok(Box::new(r))
}

#[derive(Args, Debug)]
pub struct RecommendArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Sample manifest or key list marking the visited nodes.
    #[arg(long)]
    pub visited: Option<PathBuf>,
    /// random, cf:following, cf:followers, cf:combined or ppr.
    #[arg(long)]
    pub system: Option<String>,
    /// Target key; repeatable. Defaults to every visited node.
    #[arg(long = "target")]
    pub targets: Vec<String>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub params: SystemArgs,
    /// JSON-lines output file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RecommendRun {
    pub graph: Option<PathBuf>,
    pub visited: Option<PathBuf>,
    pub system: String,
    pub targets: Vec<String>,
    pub k: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub params: SystemParams,
}

impl Default for RecommendRun {
    fn default() -> Self {
        RecommendRun {
            graph: None,
            visited: None,
            system: "ppr".to_owned(),
            targets: Vec::new(),
            k: 100,
            seed: 0,
            out: PathBuf::from("recommendations.jsonl"),
            params: SystemParams::default(),
        }
    }
}

pub fn resolve(args: &RecommendArgs) -> Result<RecommendRun, CliError> {
    let mut cfg: RecommendRun = crate::config::load(args.common.config.as_deref())?;
    overlay!(cfg, args, graph, visited, system, k, seed, out);
    if !args.targets.is_empty() {
        cfg.targets = args.targets.clone();
    }
    cfg.params.overlay(&args.params);
    Ok(cfg)
}

pub fn run(cfg: &RecommendRun) -> Result<(), CliError> {
    if !SYSTEM_NAMES.contains(&cfg.system.as_str()) {
        return Err(unknown_system(&cfg.system));
    }
    if cfg.k == 0 {
        return Err(usage("k must be at least 1"));
    }
    let g = read_graph_visited(require(&cfg.graph, "graph")?, cfg.visited.as_deref())?;
    let system = build_system(&cfg.system, &g, &cfg.params)?;
    let targets = if cfg.targets.is_empty() {
        g.visited_nodes().collect()
    } else {
        cfg.targets
            .iter()
            .map(|t| {
                g.id_of(t)
                    .ok_or_else(|| data(format!("target {t:?} is not in the graph")))
            })
            .collect::<Result<Vec<_>, _>>()?
    };
    let echo = serde_json::json!({
        "params": cfg.params.echo(&cfg.system),
        "master_seed": cfg.seed,
    });
    let mut out = String::new();
    let mut flagged = 0;
    for t in targets {
        let seed = derive_seed(cfg.seed, &cfg.system, u64::from(t.0));
        let list = system.recommend(t, cfg.k, seed);
        if list.flags.unprofiled || list.flags.not_converged {
            flagged += 1;
        }
        let rec = RankedRecord::from_list(&list, &g, &cfg.system, seed, echo.clone());
        let _ = writeln!(
            out,
            "{}",
            serde_json::to_string(&rec).expect("serializable")
        );
    }
    write_file(&cfg.out, out.as_bytes())?;
    if flagged > 0 {
        eprintln!("recommend: {flagged} target(s) flagged (unprofiled or not converged)");
    }
    Ok(())
}

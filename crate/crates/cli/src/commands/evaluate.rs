use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use clap::Args;
use fedrec::eval::{evaluate_rankings, EvalError};
use fedrec::rank::RankedRecord;
use fedrec::{
    build_snapshot_pair, run_experiment, ExperimentConfig, RankedList, Recommender, Scored,
    SnapshotPair,
};
use serde::{Deserialize, Serialize};

use super::recommend::{build_system, unknown_system, SystemArgs, SystemParams, SYSTEM_NAMES};
use super::{json_pretty, read_graph, read_graph_visited, read_text, write_file};
use crate::config::{overlay, require, Common};
use crate::error::{data, runtime, usage, CliError};

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub common: Common,
    /// Edge list at t1.
    #[arg(long)]
    pub train: Option<PathBuf>,
    /// Edge list at t2.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Sample manifest or key list marking the visited nodes of `train`.
    #[arg(long)]
    pub train_visited: Option<PathBuf>,
    /// Comma-separated systems, evaluated in this row order.
    #[arg(long, value_delimiter = ',')]
    pub systems: Option<Vec<String>>,
    /// Score precomputed `recommend` outputs instead of running systems.
    #[arg(long = "rankings")]
    pub rankings: Vec<PathBuf>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub report_ks: Option<Vec<usize>>,
    #[arg(long)]
    pub curve_max_k: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub params: SystemArgs,
    /// Directory receiving report.json, table.txt and curve.csv.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluateRun {
    pub train: Option<PathBuf>,
    pub truth: Option<PathBuf>,
    pub train_visited: Option<PathBuf>,
    pub systems: Vec<String>,
    pub rankings: Vec<PathBuf>,
    pub k: usize,
    pub report_ks: Vec<usize>,
    pub curve_max_k: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub params: SystemParams,
}

impl Default for EvaluateRun {
    fn default() -> Self {
        let e = ExperimentConfig::default();
        EvaluateRun {
            train: None,
            truth: None,
            train_visited: None,
            systems: SYSTEM_NAMES.iter().map(|s| s.to_string()).collect(),
            rankings: Vec::new(),
            k: e.k,
            report_ks: e.report_ks,
            curve_max_k: e.curve_max_k,
            seed: e.master_seed,
            out_dir: PathBuf::from("evaluation"),
            params: SystemParams::default(),
        }
    }
}

#[derive(Serialize)]
struct ReportFile<'a> {
    command: &'static str,
    resolved_config: &'a EvaluateRun,
    #[serde(flatten)]
    report: &'a fedrec::EvalReport,
}

pub fn resolve(args: &EvaluateArgs) -> Result<EvaluateRun, CliError> {
    let mut cfg: EvaluateRun = crate::config::load(args.common.config.as_deref())?;
    overlay!(
        cfg,
        args,
        train,
        truth,
        train_visited,
        systems,
        k,
        report_ks,
        curve_max_k,
        seed,
        out_dir
    );
    if !args.rankings.is_empty() {
        cfg.rankings = args.rankings.clone();
    }
    cfg.params.overlay(&args.params);
    Ok(cfg)
}

fn eval_error(e: EvalError) -> CliError {
    match e {
        EvalError::MissingTarget { .. } | EvalError::UnexpectedTarget { .. } => data(e),
        EvalError::ZeroCutoff | EvalError::NoSystems => usage(e),
        _ => runtime(e),
    }
}

/// Reads `recommend` outputs and keeps the lists of evaluation targets.
fn load_rankings(
    pair: &SnapshotPair,
    files: &[PathBuf],
) -> Result<Vec<(String, Vec<RankedList>)>, CliError> {
    let mut by_system: Vec<(String, BTreeMap<String, RankedRecord>)> = Vec::new();
    for path in files {
        for (i, line) in read_text(path)?.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let rec: RankedRecord = serde_json::from_str(line)
                .map_err(|e| data(format!("{}:{}: {e}", path.display(), i + 1)))?;
            let slot = match by_system.iter().position(|(s, _)| *s == rec.system) {
                Some(p) => p,
                None => {
                    by_system.push((rec.system.clone(), BTreeMap::new()));
                    by_system.len() - 1
                }
            };
            by_system[slot].1.insert(rec.target.clone(), rec);
        }
    }
    if let Some((first, first_lists)) = by_system.first() {
        let reference: BTreeSet<&String> = first_lists.keys().collect();
        for (name, lists) in &by_system[1..] {
            let other: BTreeSet<&String> = lists.keys().collect();
            if let Some(key) = reference.symmetric_difference(&other).next() {
                let (has, lacks) = if reference.contains(key) {
                    (first, name)
                } else {
                    (name, first)
                };
                return Err(data(format!(
                    "target sets differ: {has} has a list for {key}, {lacks} does not"
                )));
            }
        }
    }
    let train = &pair.train;
    by_system
        .into_iter()
        .map(|(name, records)| {
            let mut lists = Vec::with_capacity(pair.eval_targets.len());
            for &t in &pair.eval_targets {
                let key = train.key(t);
                let rec = records.get(key).ok_or_else(|| {
                    data(format!("{name} has no list for evaluation target {key}"))
                })?;
                let entries = rec
                    .entries
                    .iter()
                    .map(|(k, score)| {
                        train
                            .id_of(k)
                            .map(|node| Scored {
                                node,
                                score: *score,
                            })
                            .ok_or_else(|| {
                                data(format!(
                                    "{name}: candidate {k} is not in the training graph"
                                ))
                            })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                lists.push(RankedList {
                    target: t,
                    k: rec.k,
                    entries,
                    flags: rec.flags,
                });
            }
            Ok((name, lists))
        })
        .collect()
}

pub fn run(cfg: &EvaluateRun) -> Result<(), CliError> {
    let train = read_graph_visited(require(&cfg.train, "train")?, cfg.train_visited.as_deref())?;
    let truth = read_graph(require(&cfg.truth, "truth")?)?;
    let pair = build_snapshot_pair(train, truth);
    for w in &pair.warnings {
        eprintln!("warning: {w}");
    }
    let exp = ExperimentConfig {
        k: cfg.k,
        report_ks: cfg.report_ks.clone(),
        curve_max_k: cfg.curve_max_k,
        master_seed: cfg.seed,
    };
    let report = if cfg.rankings.is_empty() {
        if let Some(bad) = cfg
            .systems
            .iter()
            .find(|s| !SYSTEM_NAMES.contains(&s.as_str()))
        {
            return Err(unknown_system(bad));
        }
        let systems: Vec<Box<dyn Recommender + '_>> = cfg
            .systems
            .iter()
            .map(|s| build_system(s, &pair.train, &cfg.params))
            .collect::<Result<_, _>>()?;
        let refs: Vec<&dyn Recommender> = systems.iter().map(|b| b.as_ref()).collect();
        run_experiment(&pair, &refs, &exp).map_err(eval_error)?
    } else {
        let runs = load_rankings(&pair, &cfg.rankings)?;
        evaluate_rankings(&pair, &runs, &exp).map_err(eval_error)?
    };
    let table = report.to_table();
    write_file(
        &cfg.out_dir.join("report.json"),
        &json_pretty(&ReportFile {
            command: "evaluate",
            resolved_config: cfg,
            report: &report,
        }),
    )?;
    write_file(&cfg.out_dir.join("table.txt"), table.as_bytes())?;
    write_file(
        &cfg.out_dir.join("curve.csv"),
        report.curve_csv().as_bytes(),
    )?;
    print!("{table}");
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    Ok(())
}

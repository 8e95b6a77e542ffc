use std::path::{Path, PathBuf};

use clap::Args;
use fedrec::eval::{
    attribute_clicks, balanced_interleave, balanced_interleave_from, Attribution, EvalError,
    Origin, Side,
};
use fedrec::rank::RankedRecord;
use fedrec::seed::derived_rng;
use serde::{Deserialize, Serialize};

use super::{json_pretty, read_text, write_file};
use crate::config::{overlay, require, Common};
use crate::error::{data, usage, CliError};

#[derive(Args, Debug)]
pub struct InterleaveArgs {
    #[command(flatten)]
    pub common: Common,
    /// Ranking A: `recommend` output or one key per line.
    #[arg(long)]
    pub a: Option<PathBuf>,
    /// Ranking B, same formats as A.
    #[arg(long)]
    pub b: Option<PathBuf>,
    /// Record to use when a ranking file holds several targets.
    #[arg(long)]
    pub target: Option<String>,
    /// Comma-separated clicked keys.
    #[arg(long, value_delimiter = ',')]
    pub clicks: Option<Vec<String>>,
    /// A or B; drawn from the seed when absent.
    #[arg(long)]
    pub first: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Length cap of the shown list; 0 disables the cap.
    #[arg(long)]
    pub display_size: Option<usize>,
    /// Also write the verdict document here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InterleaveRun {
    pub a: Option<PathBuf>,
    pub b: Option<PathBuf>,
    pub target: Option<String>,
    pub clicks: Vec<String>,
    pub first: Option<String>,
    pub seed: u64,
    pub display_size: usize,
    pub out: Option<PathBuf>,
}

impl Default for InterleaveRun {
    fn default() -> Self {
        InterleaveRun {
            a: None,
            b: None,
            target: None,
            clicks: Vec::new(),
            first: None,
            seed: 0,
            display_size: 10,
            out: None,
        }
    }
}

#[derive(Serialize)]
struct ShownItem<'a> {
    rank: usize,
    key: &'a str,
    origin: Origin,
    picked_by: Side,
    clicked: bool,
}

#[derive(Serialize)]
struct Verdict<'a> {
    command: &'static str,
    resolved_config: &'a InterleaveRun,
    first_picker: Side,
    shown: Vec<ShownItem<'a>>,
    #[serde(flatten)]
    attribution: Attribution,
}

pub fn resolve(args: &InterleaveArgs) -> Result<InterleaveRun, CliError> {
    let mut cfg: InterleaveRun = crate::config::load(args.common.config.as_deref())?;
    overlay!(
        cfg,
        args,
        a,
        b,
        target,
        clicks,
        first,
        seed,
        display_size,
        out
    );
    Ok(cfg)
}

fn read_ranking(path: &Path, target: Option<&str>) -> Result<Vec<String>, CliError> {
    let text = read_text(path)?;
    if !text.trim_start().starts_with('{') {
        return Ok(text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_owned)
            .collect());
    }
    let mut records = Vec::new();
    for (i, line) in text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
    {
        let rec: RankedRecord = serde_json::from_str(line)
            .map_err(|e| data(format!("{}:{}: {e}", path.display(), i + 1)))?;
        records.push(rec);
    }
    let rec = match target {
        Some(t) => records
            .into_iter()
            .find(|r| r.target == t)
            .ok_or_else(|| data(format!("{}: no list for target {t}", path.display())))?,
        None if records.len() == 1 => records.pop().expect("one record"),
        None => {
            return Err(usage(format!(
                "{} holds {} lists; choose one with --target",
                path.display(),
                records.len()
            )))
        }
    };
    Ok(rec.entries.into_iter().map(|(k, _)| k).collect())
}

pub fn run(cfg: &InterleaveRun) -> Result<(), CliError> {
    let target = cfg.target.as_deref();
    let a = read_ranking(require(&cfg.a, "a")?, target)?;
    let b = read_ranking(require(&cfg.b, "b")?, target)?;
    let cap = (cfg.display_size > 0).then_some(cfg.display_size);
    let il = match cfg.first.as_deref() {
        Some("A" | "a") => balanced_interleave_from(&a, &b, Side::A, cap),
        Some("B" | "b") => balanced_interleave_from(&a, &b, Side::B, cap),
        Some(other) => return Err(usage(format!("first must be A or B, got {other:?}"))),
        None => balanced_interleave(&a, &b, cap, &mut derived_rng(cfg.seed, "interleave", 0)),
    }
    .map_err(data)?;
    let attribution = attribute_clicks(&il, &a, &b, &cfg.clicks).map_err(|e| match e {
        EvalError::UnknownClick(i) => {
            data(format!("clicked key {:?} was not shown", cfg.clicks[i]))
        }
        other => data(other),
    })?;
    let shown = il
        .items
        .iter()
        .enumerate()
        .map(|(i, key)| ShownItem {
            rank: i + 1,
            key,
            origin: il.origin[i],
            picked_by: il.picked_by[i],
            clicked: cfg.clicks.contains(key),
        })
        .collect();
    let doc = json_pretty(&Verdict {
        command: "interleave",
        resolved_config: cfg,
        first_picker: il.first_picker,
        shown,
        attribution,
    });
    if let Some(out) = &cfg.out {
        write_file(out, &doc)?;
    }
    print!("{}", String::from_utf8(doc).expect("utf-8 JSON"));
    Ok(())
}

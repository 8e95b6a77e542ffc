use std::collections::{BTreeMap, HashMap};
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use clap::Args;
use fedrec::federation::{
    CacheStore, FederationClient, FetchStatus, JsonlCache, MemoryCache, PolitenessPolicy,
    SimulatedProvider, VirtualClock,
};
use fedrec::sampler::{ego_walk, mhrw_sample, SampleError, SampleManifest, WalkConfig};
use serde::{Deserialize, Serialize};

use super::{edge_list_bytes, json_pretty, read_graph, write_file};
use crate::config::{overlay, require, Common};
use crate::error::{data, runtime, usage, CliError};

#[derive(Args, Debug)]
pub struct SampleArgs {
    #[command(flatten)]
    pub common: Common,
    /// Edge list of the simulated federation; keys are `name@instance`.
    #[arg(long)]
    pub world: Option<PathBuf>,
    /// Key of the first user to fetch.
    #[arg(long)]
    pub start: Option<String>,
    /// mhrw or ego.
    #[arg(long)]
    pub algorithm: Option<String>,
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Ego-walk jump-back probability.
    #[arg(long)]
    pub restart_probability: Option<f64>,
    #[arg(long)]
    pub max_requests_per_second: Option<u32>,
    #[arg(long)]
    pub respect_robots: Option<bool>,
    /// JSON-lines cache file reused across runs.
    #[arg(long)]
    pub cache: Option<PathBuf>,
    /// `instance=status` with status one of instance_blocked,
    /// instance_down or gone. Repeatable.
    #[arg(long = "fail", value_name = "INSTANCE=STATUS")]
    pub fail: Vec<String>,
    /// Directory receiving sample.tsv and sample_manifest.json.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleRun {
    pub world: Option<PathBuf>,
    pub start: String,
    pub algorithm: String,
    pub iterations: usize,
    pub seed: u64,
    pub restart_probability: f64,
    pub max_requests_per_second: u32,
    pub respect_robots: bool,
    pub cache: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub failure_plan: BTreeMap<String, FetchStatus>,
}

impl Default for SampleRun {
    fn default() -> Self {
        let walk = WalkConfig::default();
        let policy = PolitenessPolicy::default();
        SampleRun {
            world: None,
            start: String::new(),
            algorithm: "mhrw".to_owned(),
            iterations: walk.iterations,
            seed: walk.rng_seed,
            restart_probability: walk.restart_probability,
            max_requests_per_second: policy.max_requests_per_second,
            respect_robots: policy.respect_robots,
            cache: None,
            out_dir: PathBuf::from("sample"),
            failure_plan: BTreeMap::new(),
        }
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'static str,
    resolved_config: &'a SampleRun,
    #[serde(flatten)]
    sample: SampleManifest,
}

pub fn resolve(args: &SampleArgs) -> Result<SampleRun, CliError> {
    let mut cfg: SampleRun = crate::config::load(args.common.config.as_deref())?;
    overlay!(
        cfg,
        args,
        world,
        start,
        algorithm,
        iterations,
        seed,
        restart_probability,
        max_requests_per_second,
        respect_robots,
        cache,
        out_dir
    );
    for entry in &args.fail {
        let (inst, status) = entry
            .split_once('=')
            .ok_or_else(|| usage(format!("--fail expects INSTANCE=STATUS, got {entry:?}")))?;
        let status: FetchStatus =
            serde_json::from_value(serde_json::Value::String(status.to_owned())).map_err(|_| {
                usage(format!(
                    "unknown status {status:?}; expected instance_blocked, instance_down or gone"
                ))
            })?;
        cfg.failure_plan.insert(inst.to_owned(), status);
    }
    Ok(cfg)
}

pub fn run(cfg: &SampleRun) -> Result<(), CliError> {
    let world = read_graph(require(&cfg.world, "world")?)?;
    if cfg.start.is_empty() {
        return Err(usage("missing required `start` (flag or config key)"));
    }
    let walk = WalkConfig {
        iterations: cfg.iterations,
        rng_seed: cfg.seed,
        restart_probability: cfg.restart_probability,
    };
    let plan: HashMap<String, FetchStatus> = cfg
        .failure_plan
        .iter()
        .map(|(k, v)| (k.clone(), *v))
        .collect();
    let provider = Arc::new(SimulatedProvider::new(world, plan));
    let cache: Arc<dyn CacheStore> = match &cfg.cache {
        Some(path) => Arc::new(
            JsonlCache::open(path).map_err(|e| data(format!("cache {}: {e}", path.display())))?,
        ),
        None => Arc::new(MemoryCache::new()),
    };
    let policy = PolitenessPolicy {
        max_requests_per_second: cfg.max_requests_per_second,
        respect_robots: cfg.respect_robots,
        ..Default::default()
    };
    if policy.max_requests_per_second == 0 {
        return Err(usage("max_requests_per_second must be at least 1"));
    }
    let client = FederationClient::new(
        provider,
        cache,
        Arc::new(VirtualClock::new(Duration::ZERO)),
        policy,
    );
    let result = match cfg.algorithm.as_str() {
        "mhrw" => mhrw_sample(&cfg.start, &walk, &client),
        "ego" => ego_walk(&cfg.start, &walk, &client),
        other => {
            return Err(usage(format!(
                "unknown algorithm {other:?}; expected mhrw or ego"
            )))
        }
    }
    .map_err(|e| match e {
        SampleError::NoIterations | SampleError::RestartProbability(_) => usage(e),
        SampleError::Fetch(_) => data(e),
        _ => runtime(e),
    })?;
    write_file(
        &cfg.out_dir.join("sample.tsv"),
        &edge_list_bytes(&result.subgraph),
    )?;
    let manifest = Manifest {
        command: "sample",
        resolved_config: cfg,
        sample: result.manifest(&cfg.algorithm, &walk),
    };
    write_file(
        &cfg.out_dir.join("sample_manifest.json"),
        &json_pretty(&manifest),
    )?;
    let c = client.counters();
    eprintln!(
        "sample: {} iterations, {} visited, {} edges; fetches {} (cache hits {}), content requests {}, robots-blocked {}, instance-down {}, gone {}",
        manifest.sample.iterations,
        manifest.sample.visited.len(),
        manifest.sample.edge_count,
        c.provider_fetches,
        c.cache_hits,
        c.content_requests,
        c.robots_blocked,
        c.instance_down,
        c.gone
    );
    for w in &manifest.sample.warnings {
        eprintln!("warning: {w}");
    }
    Ok(())
}

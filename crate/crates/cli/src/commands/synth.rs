use std::path::PathBuf;

use clap::Args;
use fedrec::synth::{generate, SynthConfig, SynthModel};
use serde::{Deserialize, Serialize};

use super::{edge_list_bytes, json_pretty, write_file};
use crate::config::{overlay, Common};
use crate::error::{usage, CliError};

#[derive(Args, Debug)]
pub struct SynthArgs {
    #[command(flatten)]
    pub common: Common,
    /// Number of users.
    #[arg(long)]
    pub users: Option<usize>,
    /// planted-community or preferential-attachment.
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub communities: Option<usize>,
    #[arg(long)]
    pub instances: Option<usize>,
    #[arg(long)]
    pub mean_out_degree: Option<f64>,
    #[arg(long)]
    pub within_community: Option<f64>,
    #[arg(long)]
    pub changed_users: Option<usize>,
    #[arg(long)]
    pub mean_new_follows: Option<f64>,
    #[arg(long)]
    pub new_within_community: Option<f64>,
    /// Directory receiving t1.tsv, t2.tsv and synth_manifest.json.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthRun {
    pub users: usize,
    pub model: String,
    pub seed: u64,
    pub communities: usize,
    pub instances: usize,
    pub mean_out_degree: f64,
    pub within_community: f64,
    pub changed_users: usize,
    pub mean_new_follows: f64,
    pub new_within_community: f64,
    pub out_dir: PathBuf,
}

impl Default for SynthRun {
    fn default() -> Self {
        let d = SynthConfig::default();
        SynthRun {
            users: d.users,
            model: d.model.name().to_owned(),
            seed: d.rng_seed,
            communities: d.communities,
            instances: d.instances,
            mean_out_degree: d.mean_out_degree,
            within_community: d.within_community,
            changed_users: d.changed_users,
            mean_new_follows: d.mean_new_follows,
            new_within_community: d.new_within_community,
            out_dir: PathBuf::from("synth"),
        }
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'static str,
    resolved_config: &'a SynthRun,
    ground_truth: fedrec::synth::SynthManifest,
}

pub fn resolve(args: &SynthArgs) -> Result<SynthRun, CliError> {
    let mut cfg: SynthRun = crate::config::load(args.common.config.as_deref())?;
    overlay!(
        cfg,
        args,
        users,
        model,
        seed,
        communities,
        instances,
        mean_out_degree,
        within_community,
        changed_users,
        mean_new_follows,
        new_within_community,
        out_dir
    );
    Ok(cfg)
}

pub fn run(cfg: &SynthRun) -> Result<(), CliError> {
    let model: SynthModel = cfg.model.parse().map_err(usage)?;
    let world = generate(&SynthConfig {
        model,
        users: cfg.users,
        communities: cfg.communities,
        instances: cfg.instances,
        mean_out_degree: cfg.mean_out_degree,
        within_community: cfg.within_community,
        changed_users: cfg.changed_users,
        mean_new_follows: cfg.mean_new_follows,
        new_within_community: cfg.new_within_community,
        rng_seed: cfg.seed,
    })
    .map_err(usage)?;
    write_file(&cfg.out_dir.join("t1.tsv"), &edge_list_bytes(&world.t1))?;
    write_file(&cfg.out_dir.join("t2.tsv"), &edge_list_bytes(&world.t2))?;
    let m = &world.manifest;
    write_file(
        &cfg.out_dir.join("synth_manifest.json"),
        &json_pretty(&Manifest {
            command: "synth",
            resolved_config: cfg,
            ground_truth: m.clone(),
        }),
    )?;
    eprintln!(
        "synth: {} users, t1 {} edges, t2 {} edges, {} changed users, {:.2} new follows each",
        cfg.users, m.t1_edges, m.t2_edges, m.changed_users, m.mean_new_follows
    );
    Ok(())
}

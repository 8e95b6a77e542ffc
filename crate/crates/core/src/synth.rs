//! Synthetic snapshot pairs standing in for real crawls.
//!
//! Both models produce a `t1` follow graph and a `t2` graph that only adds
//! follows. A random subset of users ("changed" users) gains new follows
//! between the snapshots; the number per user is `1 + Poisson(mean - 1)`.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::Rng as _;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{DirectedGraph, GraphBuilder, NodeId};
use crate::seed::{derived_rng, Rng};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SynthModel {
    /// Users split into equal communities; follows stay mostly inside.
    PlantedCommunity,
    /// Follows pick targets with probability proportional to in-degree + 1.
    PreferentialAttachment,
}

impl SynthModel {
    pub const NAMES: [&'static str; 2] = ["planted-community", "preferential-attachment"];

    pub fn name(self) -> &'static str {
        match self {
            SynthModel::PlantedCommunity => Self::NAMES[0],
            SynthModel::PreferentialAttachment => Self::NAMES[1],
        }
    }
}

impl fmt::Display for SynthModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SynthModel {
    type Err = SynthError;

    fn from_str(s: &str) -> Result<Self, SynthError> {
        match s {
            "planted-community" | "planted" => Ok(SynthModel::PlantedCommunity),
            "preferential-attachment" | "preferential" => Ok(SynthModel::PreferentialAttachment),
            _ => Err(SynthError::UnknownModel(s.to_owned())),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("unknown model {0:?}; expected one of planted-community, preferential-attachment")]
    UnknownModel(String),
    #[error("need at least 10 users, got {0}")]
    TooSmall(usize),
    #[error("invalid parameter: {0}")]
    Parameter(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub model: SynthModel,
    pub users: usize,
    pub communities: usize,
    /// Instance host count; user `i` lives on `inst{i % instances}` unless
    /// the model assigns instances by community.
    pub instances: usize,
    pub mean_out_degree: f64,
    /// Probability that a `t1` follow stays inside the community.
    pub within_community: f64,
    pub changed_users: usize,
    pub mean_new_follows: f64,
    /// Probability that a new follow stays inside the community.
    pub new_within_community: f64,
    pub rng_seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            model: SynthModel::PlantedCommunity,
            users: 1000,
            communities: 10,
            instances: 10,
            mean_out_degree: 10.0,
            within_community: 0.8,
            changed_users: 100,
            mean_new_follows: 6.0,
            new_within_community: 0.9,
            rng_seed: 0,
        }
    }
}

impl SynthConfig {
    fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: &str| Err(SynthError::Parameter(m.to_owned()));
        if self.users < 10 {
            return Err(SynthError::TooSmall(self.users));
        }
        if self.communities == 0 || self.communities > self.users {
            return bad("communities must be in 1..=users");
        }
        if self.instances == 0 {
            return bad("instances must be at least 1");
        }
        if !(self.mean_out_degree >= 1.0 && self.mean_out_degree < (self.users - 1) as f64 / 2.0) {
            return bad("mean_out_degree must be at least 1 and below (users - 1) / 2");
        }
        if !(0.0..=1.0).contains(&self.within_community)
            || !(0.0..=1.0).contains(&self.new_within_community)
        {
            return bad("community probabilities must lie in [0, 1]");
        }
        if self.changed_users > self.users {
            return bad("changed_users exceeds users");
        }
        if !(self.mean_new_follows >= 1.0 && self.mean_new_follows < (self.users / 4) as f64) {
            return bad("mean_new_follows must be at least 1 and below users / 4");
        }
        Ok(())
    }
}

/// Ground truth recorded next to the generated files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthManifest {
    pub config: SynthConfig,
    pub t1_edges: usize,
    pub t2_edges: usize,
    pub changed_users: usize,
    pub new_follows: usize,
    pub mean_new_follows: f64,
    pub new_follows_within_community: usize,
}

#[derive(Clone, Debug)]
pub struct SynthWorld {
    pub t1: DirectedGraph,
    pub t2: DirectedGraph,
    pub community: Vec<usize>,
    /// Ids of the changed users, ascending.
    pub changed: Vec<NodeId>,
    pub manifest: SynthManifest,
}

pub fn user_key(i: usize, instance: usize) -> String {
    format!("user{i}@inst{instance}")
}

/// Draws targets for one user while rejecting self and repeats.
struct Picker<'a> {
    cfg: &'a SynthConfig,
    members: &'a [Vec<usize>],
    community: &'a [usize],
    /// Each node once plus once per received follow.
    urn: Vec<usize>,
}

impl Picker<'_> {
    fn pick(&self, u: usize, within: f64, rng: &mut Rng) -> usize {
        match self.cfg.model {
            SynthModel::PlantedCommunity => {
                let own = &self.members[self.community[u]];
                if own.len() > 1 && rng.random_bool(within) {
                    own[rng.random_range(0..own.len())]
                } else {
                    rng.random_range(0..self.cfg.users)
                }
            }
            SynthModel::PreferentialAttachment => self.urn[rng.random_range(0..self.urn.len())],
        }
    }

    fn follow_many(
        &mut self,
        u: usize,
        count: usize,
        within: f64,
        taken: &mut HashSet<usize>,
        rng: &mut Rng,
    ) -> Vec<usize> {
        let mut out = Vec::with_capacity(count);
        let mut attempts = 0;
        while out.len() < count && attempts < 1000 * count.max(1) {
            attempts += 1;
            let v = self.pick(u, within, rng);
            if v != u && taken.insert(v) {
                out.push(v);
                self.urn.push(v);
            }
        }
        out
    }
}

#[allow(clippy::needless_range_loop)]
pub fn generate(cfg: &SynthConfig) -> Result<SynthWorld, SynthError> {
    cfg.validate()?;
    let n = cfg.users;
    let community: Vec<usize> = (0..n).map(|i| i * cfg.communities / n).collect();
    let mut members = vec![Vec::new(); cfg.communities];
    for (i, &c) in community.iter().enumerate() {
        members[c].push(i);
    }
    let instance_of = |i: usize| match cfg.model {
        SynthModel::PlantedCommunity => community[i] % cfg.instances,
        SynthModel::PreferentialAttachment => i % cfg.instances,
    };
    let mut picker = Picker {
        cfg,
        members: &members,
        community: &community,
        urn: (0..n).collect(),
    };

    let mut rng = derived_rng(cfg.rng_seed, "synth/t1", 0);
    let extra = Poisson::new(cfg.mean_out_degree - 1.0).ok();
    let mut out: Vec<HashSet<usize>> = vec![HashSet::new(); n];
    for u in 0..n {
        let d = 1 + extra.map_or(0, |p| p.sample(&mut rng) as usize);
        let d = d.min(n - 1);
        picker.follow_many(u, d, cfg.within_community, &mut out[u], &mut rng);
    }
    let t1_adj: Vec<Vec<usize>> = out.iter().map(sorted).collect();

    let mut rng = derived_rng(cfg.rng_seed, "synth/t2", 0);
    let mut changed: Vec<usize> = sample(&mut rng, n, cfg.changed_users).into_vec();
    changed.sort_unstable();
    let extra = Poisson::new(cfg.mean_new_follows - 1.0).ok();
    let mut new_follows = 0;
    let mut within = 0;
    for &u in &changed {
        let d = 1 + extra.map_or(0, |p| p.sample(&mut rng) as usize);
        let added = picker.follow_many(u, d, cfg.new_within_community, &mut out[u], &mut rng);
        new_follows += added.len();
        within += added
            .iter()
            .filter(|&&v| community[v] == community[u])
            .count();
    }
    let t2_adj: Vec<Vec<usize>> = out.iter().map(sorted).collect();

    let keys: Vec<String> = (0..n).map(|i| user_key(i, instance_of(i))).collect();
    let t1 = assemble(&keys, &t1_adj);
    let t2 = assemble(&keys, &t2_adj);
    let manifest = SynthManifest {
        config: cfg.clone(),
        t1_edges: t1.edge_count(),
        t2_edges: t2.edge_count(),
        changed_users: changed.len(),
        new_follows,
        mean_new_follows: if changed.is_empty() {
            0.0
        } else {
            new_follows as f64 / changed.len() as f64
        },
        new_follows_within_community: within,
    };
    Ok(SynthWorld {
        t1,
        t2,
        community,
        changed: changed.into_iter().map(NodeId::from).collect(),
        manifest,
    })
}

fn sorted(s: &HashSet<usize>) -> Vec<usize> {
    let mut v: Vec<usize> = s.iter().copied().collect();
    v.sort_unstable();
    v
}

fn assemble(keys: &[String], adj: &[Vec<usize>]) -> DirectedGraph {
    let mut b = GraphBuilder::new();
    for k in keys {
        b.intern(k);
    }
    for (u, vs) in adj.iter().enumerate() {
        for &v in vs {
            b.add_edge_ids(NodeId::from(u), NodeId::from(v));
        }
    }
    b.build().0
}

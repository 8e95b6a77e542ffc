//! Ranked recommendation lists shared by every recommender.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::graph::{DirectedGraph, NodeId};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scored {
    pub node: NodeId,
    pub score: f64,
}

/// Diagnostics attached to a list rather than raised as errors, so that an
/// evaluation run keeps its target pairing intact.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankFlags {
    /// The target had no profile under the requested strategy.
    pub unprofiled: bool,
    /// An iterative scorer stopped at its iteration cap.
    pub not_converged: bool,
}

/// Scores are non-increasing, ties ordered by ascending node id, the target
/// never appears and `entries.len() <= k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankedList {
    pub target: NodeId,
    pub k: usize,
    pub entries: Vec<Scored>,
    #[serde(default)]
    pub flags: RankFlags,
}

impl RankedList {
    pub fn empty(target: NodeId, k: usize) -> Self {
        RankedList {
            target,
            k,
            entries: Vec::new(),
            flags: RankFlags::default(),
        }
    }

    pub fn nodes(&self) -> Vec<NodeId> {
        self.entries.iter().map(|e| e.node).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Descending score, then ascending id.
pub fn rank_order(a: &Scored, b: &Scored) -> Ordering {
    b.score.total_cmp(&a.score).then(a.node.cmp(&b.node))
}

/// Top `k` of `candidates` under [`rank_order`].
pub fn top_k(mut candidates: Vec<Scored>, k: usize) -> Vec<Scored> {
    if candidates.len() > k && k > 0 {
        candidates.select_nth_unstable_by(k - 1, rank_order);
        candidates.truncate(k);
    }
    if k == 0 {
        candidates.clear();
    }
    candidates.sort_by(rank_order);
    candidates
}

/// Membership mask of nodes that may not be recommended to `target`: the
/// target itself and, when `exclude_followees` is set, everyone it already
/// follows in `g`.
pub fn exclusion_mask(g: &DirectedGraph, target: NodeId, exclude_followees: bool) -> Vec<bool> {
    let mut mask = vec![false; g.node_count()];
    if target.index() < mask.len() {
        mask[target.index()] = true;
        if exclude_followees {
            for &v in g.successors(target) {
                mask[v.index()] = true;
            }
        }
    }
    mask
}

/// A who-to-follow system that can be evaluated offline.
pub trait Recommender: Send + Sync {
    /// Short system tag, e.g. `cf:following`.
    fn name(&self) -> String;

    /// Top-`k` candidates for `target`. `rng_seed` feeds any randomized
    /// step; deterministic systems ignore it.
    fn recommend(&self, target: NodeId, k: usize, rng_seed: u64) -> RankedList;
}

/// One JSON-lines record of a recommendation output file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankedRecord {
    pub system: String,
    pub target: String,
    pub k: usize,
    pub rng_seed: u64,
    #[serde(default)]
    pub config: serde_json::Value,
    pub flags: RankFlags,
    /// `(candidate key, score)` pairs in rank order.
    pub entries: Vec<(String, f64)>,
}

impl RankedRecord {
    pub fn from_list(
        list: &RankedList,
        g: &DirectedGraph,
        system: &str,
        rng_seed: u64,
        config: serde_json::Value,
    ) -> Self {
        RankedRecord {
            system: system.to_owned(),
            target: g.key(list.target).to_owned(),
            k: list.k,
            rng_seed,
            config,
            flags: list.flags,
            entries: list
                .entries
                .iter()
                .map(|e| (g.key(e.node).to_owned(), e.score))
                .collect(),
        }
    }
}

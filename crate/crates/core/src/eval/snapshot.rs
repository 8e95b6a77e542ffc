//! Training/truth snapshot pairs for temporal evaluation.

use std::collections::{BTreeMap, BTreeSet};

use crate::graph::{diff_edges, DirectedGraph, NodeId};

/// Two crawls of the same users at `t1` (train) and `t2` (truth).
///
/// Relevance sets use train ids. A newly followed user who is unknown at
/// `t1` gets a fresh id at or above `train.node_count()`; no recommender can
/// ever return it, but it still counts in the AP denominator.
#[derive(Clone, Debug)]
pub struct SnapshotPair {
    pub train: DirectedGraph,
    pub truth: DirectedGraph,
    /// Sorted by id.
    pub eval_targets: Vec<NodeId>,
    pub relevance: BTreeMap<NodeId, BTreeSet<NodeId>>,
    /// Keys for the fresh ids, indexed by `id - train.node_count()`.
    pub extra_keys: Vec<String>,
    pub warnings: Vec<String>,
}

impl SnapshotPair {
    pub fn key(&self, id: NodeId) -> &str {
        match id.index().checked_sub(self.train.node_count()) {
            Some(i) => &self.extra_keys[i],
            None => self.train.key(id),
        }
    }

    pub fn relevant(&self, target: NodeId) -> Option<&BTreeSet<NodeId>> {
        self.relevance.get(&target)
    }

    pub fn target_count(&self) -> usize {
        self.eval_targets.len()
    }
}

/// Evaluation targets are users visited in both snapshots who follow at
/// least one new account at `t2`. Users missing from the truth snapshot
/// (deleted profiles) are skipped.
pub fn build_snapshot_pair(train: DirectedGraph, truth: DirectedGraph) -> SnapshotPair {
    let diff = diff_edges(&train, &truth);
    let mut extra_keys: Vec<String> = Vec::new();
    let mut extra_ids: BTreeMap<String, NodeId> = BTreeMap::new();
    let mut relevance = BTreeMap::new();
    for (key, added) in &diff {
        let (Some(u), Some(u_truth)) = (train.id_of(key), truth.id_of(key)) else {
            continue;
        };
        if !train.is_visited(u) || !truth.is_visited(u_truth) {
            continue;
        }
        let mut rel = BTreeSet::new();
        for v in added {
            let id = match train.id_of(v) {
                Some(id) => id,
                None => *extra_ids.entry(v.clone()).or_insert_with(|| {
                    extra_keys.push(v.clone());
                    NodeId::from(train.node_count() + extra_keys.len() - 1)
                }),
            };
            rel.insert(id);
        }
        relevance.insert(u, rel);
    }
    let eval_targets: Vec<NodeId> = relevance.keys().copied().collect();
    let mut warnings = Vec::new();
    if eval_targets.is_empty() {
        warnings.push(
            "no visited user gained a follow between the snapshots; nothing to evaluate".to_owned(),
        );
    }
    SnapshotPair {
        train,
        truth,
        eval_targets,
        relevance,
        extra_keys,
        warnings,
    }
}

//! Personalized PageRank from a single seed user.
//!
//! The walk follows out-edges (the follow direction) by default. Mass on a
//! node without out-edges returns to the seed, so nodes that cannot be
//! reached from the seed keep a score of exactly zero.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{DirectedGraph, NodeId};
use crate::rank::{exclusion_mask, top_k, RankedList, Recommender, Scored};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum WalkView {
    #[default]
    Directed,
    Undirected,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PprConfig {
    pub damping: f64,
    /// Stop once the L1 change between iterates drops below this.
    pub tolerance: f64,
    pub max_iterations: usize,
    #[serde(default)]
    pub view: WalkView,
}

impl Default for PprConfig {
    fn default() -> Self {
        PprConfig {
            damping: 0.85,
            tolerance: 1e-10,
            max_iterations: 1000,
            view: WalkView::Directed,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PprVector {
    pub scores: Vec<f64>,
    pub seed: NodeId,
    pub iterations_used: usize,
    pub converged: bool,
}

#[derive(Debug, Error, PartialEq)]
pub enum PprError {
    #[error("seed {0} out of range")]
    SeedOutOfRange(NodeId),
    #[error("damping must lie in (0, 1), got {0}")]
    Damping(f64),
    #[error("dense solve supports at most {max} nodes, got {got}")]
    TooLarge { max: usize, got: usize },
    #[error("singular system")]
    Singular,
}

/// Neighbor lists used as the transition structure.
#[derive(Clone, Debug)]
pub struct Transitions<'g> {
    graph: &'g DirectedGraph,
    undirected: Option<Vec<Vec<NodeId>>>,
}

impl<'g> Transitions<'g> {
    pub fn new(graph: &'g DirectedGraph, view: WalkView) -> Self {
        let undirected = match view {
            WalkView::Directed => None,
            WalkView::Undirected => Some(graph.undirected_adjacency()),
        };
        Transitions { graph, undirected }
    }

    #[inline]
    pub fn next(&self, u: usize) -> &[NodeId] {
        match &self.undirected {
            Some(adj) => &adj[u],
            None => self.graph.successors(NodeId::from(u)),
        }
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }
}

fn validate(g: &DirectedGraph, seed: NodeId, damping: f64) -> Result<(), PprError> {
    if seed.index() >= g.node_count() {
        return Err(PprError::SeedOutOfRange(seed));
    }
    if !(damping > 0.0 && damping < 1.0) {
        return Err(PprError::Damping(damping));
    }
    Ok(())
}

pub fn ppr_power_iteration(
    g: &DirectedGraph,
    seed: NodeId,
    cfg: &PprConfig,
) -> Result<PprVector, PprError> {
    validate(g, seed, cfg.damping)?;
    Ok(power_iterate(
        &Transitions::new(g, cfg.view),
        seed,
        cfg,
        |_, _| {},
    ))
}

/// Power iteration calling `observe(iteration, iterate)` after every update.
pub fn power_iterate<F>(
    t: &Transitions<'_>,
    seed: NodeId,
    cfg: &PprConfig,
    mut observe: F,
) -> PprVector
where
    F: FnMut(usize, &[f64]),
{
    let n = t.node_count();
    let s = seed.index();
    let lambda = cfg.damping;
    let mut r = vec![0.0; n];
    r[s] = 1.0;
    let mut next = vec![0.0; n];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < cfg.max_iterations {
        next.iter_mut().for_each(|x| *x = 0.0);
        let mut dangling = 0.0;
        for (u, &mass) in r.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            let out = t.next(u);
            if out.is_empty() {
                dangling += mass;
            } else {
                let share = lambda * mass / out.len() as f64;
                for v in out {
                    next[v.index()] += share;
                }
            }
        }
        next[s] += lambda * dangling + (1.0 - lambda);
        let diff: f64 = r.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut r, &mut next);
        iterations += 1;
        observe(iterations, &r);
        if diff < cfg.tolerance {
            converged = true;
            break;
        }
    }
    PprVector {
        scores: r,
        seed,
        iterations_used: iterations,
        converged,
    }
}

/// Largest graph accepted by [`ppr_dense_oracle`].
pub const DENSE_ORACLE_MAX_NODES: usize = 50;

/// Solves `(I - λ Mᵀ) r = (1 - λ) e_seed` by Gaussian elimination with the
/// same dangling convention as the power iteration. Reference solver for
/// small graphs.
#[allow(clippy::needless_range_loop)]
pub fn ppr_dense_oracle(
    g: &DirectedGraph,
    seed: NodeId,
    damping: f64,
    view: WalkView,
) -> Result<PprVector, PprError> {
    validate(g, seed, damping)?;
    let n = g.node_count();
    if n > DENSE_ORACLE_MAX_NODES {
        return Err(PprError::TooLarge {
            max: DENSE_ORACLE_MAX_NODES,
            got: n,
        });
    }
    let t = Transitions::new(g, view);
    let s = seed.index();
    // a[v][u] = δ(v,u) - λ M[u][v]; augmented column holds the rhs.
    let mut a = vec![vec![0.0; n + 1]; n];
    for (v, row) in a.iter_mut().enumerate() {
        row[v] = 1.0;
    }
    for u in 0..n {
        let out = t.next(u);
        if out.is_empty() {
            a[s][u] -= damping;
        } else {
            let w = damping / out.len() as f64;
            for v in out {
                a[v.index()][u] -= w;
            }
        }
    }
    a[s][n] = 1.0 - damping;

    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .expect("non-empty pivot range");
        if a[pivot][col].abs() < 1e-14 {
            return Err(PprError::Singular);
        }
        a.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                for c in col..=n {
                    a[row][c] -= f * a[col][c];
                }
            }
        }
    }
    let mut r = vec![0.0; n];
    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|c| a[row][c] * r[c]).sum();
        r[row] = (a[row][n] - tail) / a[row][row];
    }
    Ok(PprVector {
        scores: r,
        seed,
        iterations_used: 0,
        converged: true,
    })
}

/// Personalized PageRank recommender.
#[derive(Clone, Debug)]
pub struct PprRecommender<'g> {
    pub graph: &'g DirectedGraph,
    pub config: PprConfig,
    pub exclude_followees: bool,
    transitions: Transitions<'g>,
}

impl<'g> PprRecommender<'g> {
    pub fn new(graph: &'g DirectedGraph, config: PprConfig) -> Self {
        PprRecommender {
            graph,
            config,
            exclude_followees: true,
            transitions: Transitions::new(graph, config.view),
        }
    }
}

/// Top-`k` nodes by PPR score from `target`; zero-score nodes are never
/// returned. A run that hits the iteration cap still produces a list,
/// flagged `not_converged`.
pub fn recommend_ppr(
    g: &DirectedGraph,
    target: NodeId,
    k: usize,
    cfg: &PprConfig,
) -> Result<RankedList, PprError> {
    validate(g, target, cfg.damping)?;
    let rec = PprRecommender::new(g, *cfg);
    Ok(rec.recommend(target, k, 0))
}

impl Recommender for PprRecommender<'_> {
    fn name(&self) -> String {
        "ppr".to_owned()
    }

    fn recommend(&self, target: NodeId, k: usize, _rng_seed: u64) -> RankedList {
        if target.index() >= self.graph.node_count() {
            return RankedList::empty(target, k);
        }
        let pv = power_iterate(&self.transitions, target, &self.config, |_, _| {});
        let mask = exclusion_mask(self.graph, target, self.exclude_followees);
        let candidates = pv
            .scores
            .iter()
            .enumerate()
            .filter(|&(u, &s)| s > 0.0 && !mask[u])
            .map(|(u, &score)| Scored {
                node: NodeId::from(u),
                score,
            })
            .collect();
        let mut list = RankedList {
            target,
            k,
            entries: top_k(candidates, k),
            flags: Default::default(),
        };
        list.flags.not_converged = !pv.converged;
        list
    }
}

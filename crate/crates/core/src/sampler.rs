//! Random-walk sampling of a follow graph.
//!
//! [`mhrw_sample`] runs a Metropolis–Hastings random walk on the undirected
//! view of the follow graph (every directed edge treated as bidirectional),
//! whose stationary distribution is uniform over nodes. [`ego_walk`] is a
//! restart walk around one seed user used to build a recommendation-time
//! vicinity. Both fetch adjacency lazily, once per node.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::rc::Rc;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::federation::{FederationClient, FetchError, FetchStatus, Provider, UserRecord};
use crate::graph::{DirectedGraph, GraphBuilder, NodeId};
use crate::seed::rng_from;
use crate::special::chi_square_upper;

#[derive(Debug, Error)]
pub enum SampleError {
    #[error("walk is stuck: current node has no neighbors")]
    Stuck,
    #[error("start node {key} could not be fetched ({status:?})")]
    StartUnfetchable { key: String, status: FetchStatus },
    #[error("iterations must be at least 1")]
    NoIterations,
    #[error("restart probability must lie in (0, 1], got {0}")]
    RestartProbability(f64),
    #[error(transparent)]
    Fetch(#[from] FetchError),
}

/// Source of user records for a walk.
pub trait Fetcher {
    fn fetch(&self, key: &str) -> Result<UserRecord, FetchError>;
}

impl<P: Provider> Fetcher for FederationClient<P> {
    fn fetch(&self, key: &str) -> Result<UserRecord, FetchError> {
        self.fetch_user(key)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalkConfig {
    pub iterations: usize,
    pub rng_seed: u64,
    /// Probability of jumping back to the seed at each ego-walk step
    /// (`1 - γ`). Ignored by the MHRW.
    pub restart_probability: f64,
}

impl Default for WalkConfig {
    fn default() -> Self {
        WalkConfig {
            iterations: 200,
            rng_seed: 0,
            restart_probability: 0.2,
        }
    }
}

impl WalkConfig {
    fn validate(&self) -> Result<(), SampleError> {
        if self.iterations == 0 {
            return Err(SampleError::NoIterations);
        }
        if !(self.restart_probability > 0.0 && self.restart_probability <= 1.0) {
            return Err(SampleError::RestartProbability(self.restart_probability));
        }
        Ok(())
    }
}

/// Acceptance probability `min(1, deg(u) / deg(v))` of a move `u -> v`.
pub fn acceptance_probability(deg_current: usize, deg_candidate: usize) -> f64 {
    if deg_candidate == 0 {
        return 0.0;
    }
    (deg_current as f64 / deg_candidate as f64).min(1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StepOutcome<N> {
    pub next: N,
    pub proposed: N,
    pub accepted: bool,
}

/// One Metropolis–Hastings step from `current`, whose undirected neighbors
/// are `neighbors`. `degree_of` returns the undirected degree of a
/// candidate, or `None` when it cannot be resolved; such candidates are
/// rejected.
pub fn mhrw_step<N, R, D>(
    current: N,
    neighbors: &[N],
    mut degree_of: D,
    rng: &mut R,
) -> Result<StepOutcome<N>, SampleError>
where
    N: Copy,
    R: Rng + ?Sized,
    D: FnMut(N) -> Option<usize>,
{
    if neighbors.is_empty() {
        return Err(SampleError::Stuck);
    }
    let proposed = neighbors[rng.random_range(0..neighbors.len())];
    let accepted = match degree_of(proposed) {
        None | Some(0) => false,
        Some(deg) => {
            let p = acceptance_probability(neighbors.len(), deg);
            p >= 1.0 || rng.random::<f64>() < p
        }
    };
    Ok(StepOutcome {
        next: if accepted { proposed } else { current },
        proposed,
        accepted,
    })
}

/// MHRW directly over an in-memory graph. Returns the state at the start of
/// each of `iterations` proposal steps.
pub fn mhrw_walk_graph<R: Rng + ?Sized>(
    g: &DirectedGraph,
    start: NodeId,
    iterations: usize,
    rng: &mut R,
) -> Result<Vec<NodeId>, SampleError> {
    let adj = g.undirected_adjacency();
    let mut current = start;
    let mut order = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        order.push(current);
        current = mhrw_step(
            current,
            &adj[current.index()],
            |v| Some(adj[v.index()].len()),
            rng,
        )?
        .next;
    }
    Ok(order)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FetchFailure {
    pub key: String,
    pub status: FetchStatus,
}

/// Outcome of a walk.
///
/// `visited_order` holds one entry per iteration (the state at the start of
/// that iteration). `subgraph` contains every visited node with its full
/// adjacency (visited flag set) plus their neighbors as unvisited nodes.
/// Node ids in the subgraph follow ascending external key.
#[derive(Clone, Debug)]
pub struct SampleResult {
    pub start: String,
    pub visited_order: Vec<NodeId>,
    pub unique_visited: BTreeSet<NodeId>,
    pub subgraph: DirectedGraph,
    pub proposals: usize,
    pub accepted: usize,
    pub teleports: usize,
    /// Distinct nodes successfully fetched.
    pub fetched: usize,
    pub failures: Vec<FetchFailure>,
    pub warnings: Vec<String>,
}

type Local = u32;

enum Slot {
    Unfetched,
    Failed,
    Known(Rc<[Local]>),
}

/// Lazily fetched undirected view, keyed by local ids.
struct LazyView<'f, F: Fetcher + ?Sized> {
    fetcher: &'f F,
    ids: HashMap<String, Local>,
    keys: Vec<String>,
    slots: Vec<Slot>,
    records: BTreeMap<Local, UserRecord>,
    failures: Vec<FetchFailure>,
}

impl<'f, F: Fetcher + ?Sized> LazyView<'f, F> {
    fn new(fetcher: &'f F) -> Self {
        LazyView {
            fetcher,
            ids: HashMap::new(),
            keys: Vec::new(),
            slots: Vec::new(),
            records: BTreeMap::new(),
            failures: Vec::new(),
        }
    }

    fn intern(&mut self, key: &str) -> Local {
        if let Some(&id) = self.ids.get(key) {
            return id;
        }
        let id = self.keys.len() as Local;
        self.keys.push(key.to_owned());
        self.ids.insert(key.to_owned(), id);
        self.slots.push(Slot::Unfetched);
        id
    }

    /// Undirected neighbors of `u`, fetching on first access. `None` when
    /// the fetch did not yield an `ok` record.
    fn neighbors(&mut self, u: Local) -> Result<Option<Rc<[Local]>>, FetchError> {
        match &self.slots[u as usize] {
            Slot::Known(n) => return Ok(Some(n.clone())),
            Slot::Failed => return Ok(None),
            Slot::Unfetched => {}
        }
        let key = self.keys[u as usize].clone();
        let rec = self.fetcher.fetch(&key)?;
        if !rec.is_ok() {
            self.failures.push(FetchFailure {
                key,
                status: rec.status,
            });
            self.slots[u as usize] = Slot::Failed;
            return Ok(None);
        }
        let mut nbrs: Vec<Local> = rec
            .following
            .iter()
            .flatten()
            .chain(rec.followers.iter().flatten())
            .filter(|k| **k != key)
            .map(|k| self.intern(k))
            .collect();
        nbrs.sort_unstable();
        nbrs.dedup();
        let nbrs: Rc<[Local]> = nbrs.into();
        self.slots[u as usize] = Slot::Known(nbrs.clone());
        self.records.insert(u, rec);
        Ok(Some(nbrs))
    }

    fn start(&mut self, key: &str) -> Result<Local, SampleError> {
        let u = self.intern(key);
        if self.neighbors(u)?.is_none() {
            let status = self.failures.last().map_or(FetchStatus::Gone, |f| f.status);
            return Err(SampleError::StartUnfetchable {
                key: key.to_owned(),
                status,
            });
        }
        Ok(u)
    }

    fn finish(
        self,
        start: &str,
        order: Vec<Local>,
        counters: (usize, usize, usize),
        warnings: Vec<String>,
    ) -> SampleResult {
        let visited: BTreeSet<Local> = order.iter().copied().collect();
        let mut keys: BTreeSet<&str> = BTreeSet::new();
        for &u in &visited {
            let rec = &self.records[&u];
            keys.insert(&rec.external_key);
            keys.extend(rec.following.iter().flatten().map(String::as_str));
            keys.extend(rec.followers.iter().flatten().map(String::as_str));
        }
        let mut b = GraphBuilder::new();
        for k in &keys {
            b.intern(k);
        }
        for &u in &visited {
            let rec = &self.records[&u];
            let me = b.intern(&rec.external_key);
            b.mark_visited(me);
            for f in rec.following.iter().flatten() {
                b.add_edge(&rec.external_key, f);
            }
            for f in rec.followers.iter().flatten() {
                b.add_edge(f, &rec.external_key);
            }
        }
        let (subgraph, _) = b.build();
        let map = |u: Local| {
            subgraph
                .id_of(&self.keys[u as usize])
                .expect("visited node in subgraph")
        };
        let visited_order: Vec<NodeId> = order.iter().map(|&u| map(u)).collect();
        let unique_visited = visited.iter().map(|&u| map(u)).collect();
        SampleResult {
            start: start.to_owned(),
            visited_order,
            unique_visited,
            subgraph,
            proposals: counters.0,
            accepted: counters.1,
            teleports: counters.2,
            fetched: self.records.len(),
            failures: self.failures,
            warnings,
        }
    }
}

/// Metropolis–Hastings random walk from `start` for `config.iterations`
/// proposal steps. Self-transitions count as iterations. Candidates whose
/// fetch fails are rejected and the walk continues.
pub fn mhrw_sample<F: Fetcher + ?Sized>(
    start: &str,
    config: &WalkConfig,
    fetcher: &F,
) -> Result<SampleResult, SampleError> {
    if config.iterations == 0 {
        return Err(SampleError::NoIterations);
    }
    let mut rng = rng_from(config.rng_seed);
    let mut view = LazyView::new(fetcher);
    let mut current = view.start(start)?;
    let mut order = Vec::with_capacity(config.iterations);
    let (mut proposals, mut accepted) = (0, 0);
    let mut warnings = Vec::new();
    for _ in 0..config.iterations {
        order.push(current);
        let nbrs = view
            .neighbors(current)?
            .expect("current node is always fetched");
        let mut fetch_err = None;
        let step = mhrw_step(
            current,
            &nbrs,
            |v| match view.neighbors(v) {
                Ok(n) => n.map(|n| n.len()),
                Err(e) => {
                    fetch_err = Some(e);
                    None
                }
            },
            &mut rng,
        );
        if let Some(e) = fetch_err {
            return Err(e.into());
        }
        match step {
            Ok(s) => {
                proposals += 1;
                if s.accepted {
                    accepted += 1;
                }
                current = s.next;
            }
            Err(SampleError::Stuck) => {
                warnings.push(format!("start {start} has no neighbors; walk cannot move"));
                order.resize(config.iterations, current);
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(view.finish(start, order, (proposals, accepted, 0), warnings))
}

/// Egocentric restart walk: at each step jump back to `seed` with
/// probability `restart_probability`, otherwise move to a uniform
/// undirected neighbor. A node with no neighbors forces a jump to the
/// seed; a neighbor that cannot be fetched leaves the walk in place.
pub fn ego_walk<F: Fetcher + ?Sized>(
    seed: &str,
    config: &WalkConfig,
    fetcher: &F,
) -> Result<SampleResult, SampleError> {
    config.validate()?;
    let mut rng = rng_from(config.rng_seed);
    let mut view = LazyView::new(fetcher);
    let origin = view.start(seed)?;
    let mut warnings = Vec::new();
    if view.neighbors(origin)?.is_some_and(|n| n.is_empty()) {
        warnings.push(format!("seed {seed} has no neighbors"));
    }
    let mut current = origin;
    let mut order = Vec::with_capacity(config.iterations);
    let (mut moves, mut teleports) = (0, 0);
    for i in 0..config.iterations {
        order.push(current);
        if i + 1 == config.iterations {
            break;
        }
        if rng.random::<f64>() < config.restart_probability {
            current = origin;
            teleports += 1;
            continue;
        }
        let nbrs = view
            .neighbors(current)?
            .expect("current node is always fetched");
        if nbrs.is_empty() {
            current = origin;
            teleports += 1;
            continue;
        }
        let v = nbrs[rng.random_range(0..nbrs.len())];
        if view.neighbors(v)?.is_some() {
            current = v;
            moves += 1;
        }
    }
    Ok(view.finish(seed, order, (moves, moves, teleports), warnings))
}

/// Visit counts per node after discarding the first `burn_in` fraction of
/// `order` and keeping every `thin`-th remaining entry.
pub fn visit_counts(order: &[NodeId], node_count: usize, burn_in: f64, thin: usize) -> Vec<u64> {
    let skip = ((order.len() as f64) * burn_in.clamp(0.0, 1.0)).floor() as usize;
    let mut counts = vec![0u64; node_count];
    for &u in order[skip..].iter().step_by(thin.max(1)) {
        counts[u.index()] += 1;
    }
    counts
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
}

/// Pearson chi-square goodness of fit of `counts` against the uniform
/// distribution.
pub fn chi_square_uniform(counts: &[u64]) -> ChiSquare {
    let k = counts.len();
    let total: u64 = counts.iter().sum();
    if k < 2 || total == 0 {
        return ChiSquare {
            statistic: 0.0,
            df: k.saturating_sub(1),
            p_value: 1.0,
        };
    }
    let expected = total as f64 / k as f64;
    let statistic = counts
        .iter()
        .map(|&c| {
            let d = c as f64 - expected;
            d * d / expected
        })
        .sum();
    let df = k - 1;
    ChiSquare {
        statistic,
        df,
        p_value: chi_square_upper(statistic, df as f64),
    }
}

/// JSON sidecar written next to a sample's edge list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleManifest {
    pub algorithm: String,
    pub start: String,
    pub config: WalkConfig,
    pub iterations: usize,
    pub proposals: usize,
    pub accepted: usize,
    pub teleports: usize,
    pub fetched: usize,
    pub node_count: usize,
    pub edge_count: usize,
    /// Sorted keys of visited nodes.
    pub visited: Vec<String>,
    pub failures: Vec<FetchFailure>,
    pub warnings: Vec<String>,
}

impl SampleResult {
    pub fn manifest(&self, algorithm: &str, config: &WalkConfig) -> SampleManifest {
        SampleManifest {
            algorithm: algorithm.to_owned(),
            start: self.start.clone(),
            config: *config,
            iterations: self.visited_order.len(),
            proposals: self.proposals,
            accepted: self.accepted,
            teleports: self.teleports,
            fetched: self.fetched,
            node_count: self.subgraph.node_count(),
            edge_count: self.subgraph.edge_count(),
            visited: self
                .unique_visited
                .iter()
                .map(|&u| self.subgraph.key(u).to_owned())
                .collect(),
            failures: self.failures.clone(),
            warnings: self.warnings.clone(),
        }
    }
}

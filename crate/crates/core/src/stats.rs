//! Topology statistics of a follow graph: size, degree, assortativity,
//! clustering and strongly connected components.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::graph::{DirectedGraph, GraphError, NodeId};

/// Degree pairing used for the assortativity coefficient. Directed variants
/// correlate `(source degree, target degree)` over every directed edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum AssortativityMode {
    #[default]
    OutIn,
    OutOut,
    InIn,
    InOut,
    /// Total degree on the undirected view, each undirected edge counted in
    /// both orientations.
    Undirected,
}

impl AssortativityMode {
    pub const ALL: [AssortativityMode; 5] = [
        AssortativityMode::OutIn,
        AssortativityMode::OutOut,
        AssortativityMode::InIn,
        AssortativityMode::InOut,
        AssortativityMode::Undirected,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AssortativityMode::OutIn => "out-in",
            AssortativityMode::OutOut => "out-out",
            AssortativityMode::InIn => "in-in",
            AssortativityMode::InOut => "in-out",
            AssortativityMode::Undirected => "undirected",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphStats {
    pub node_count: usize,
    pub visited_count: usize,
    pub edge_count: usize,
    pub assortativity_mode: AssortativityMode,
    pub assortativity: f64,
    /// Set when every endpoint degree was constant and the coefficient was
    /// reported as 0.
    pub assortativity_degenerate: bool,
    /// `|E| / |V|`.
    pub avg_degree: f64,
    /// `2 |E| / |V|`, counting both endpoints of every edge.
    pub avg_total_degree: f64,
    pub ncc: f64,
    pub scc_fraction: f64,
}

pub fn compute_stats(g: &DirectedGraph) -> Result<GraphStats, GraphError> {
    compute_stats_with(g, AssortativityMode::default())
}

pub fn compute_stats_with(
    g: &DirectedGraph,
    mode: AssortativityMode,
) -> Result<GraphStats, GraphError> {
    let n = g.node_count();
    if n == 0 {
        return Err(GraphError::Empty);
    }
    let (assortativity, degenerate) = assortativity(g, mode);
    let largest = strongly_connected_components(g)
        .iter()
        .map(Vec::len)
        .max()
        .unwrap_or(0);
    Ok(GraphStats {
        node_count: n,
        visited_count: g.visited_count(),
        edge_count: g.edge_count(),
        assortativity_mode: mode,
        assortativity,
        assortativity_degenerate: degenerate,
        avg_degree: g.edge_count() as f64 / n as f64,
        avg_total_degree: 2.0 * g.edge_count() as f64 / n as f64,
        ncc: average_clustering(g),
        scc_fraction: largest as f64 / n as f64,
    })
}

/// Pearson degree correlation. Returns `(coefficient, degenerate)`; a zero
/// variance on either side yields `(0.0, true)`.
pub fn assortativity(g: &DirectedGraph, mode: AssortativityMode) -> (f64, bool) {
    let out_deg = |u: NodeId| g.successors(u).len() as f64;
    let in_deg = |u: NodeId| g.predecessors(u).len() as f64;
    let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(g.edge_count() * 2);
    match mode {
        AssortativityMode::Undirected => {
            let adj = g.undirected_adjacency();
            for (u, list) in adj.iter().enumerate() {
                for &v in list {
                    pairs.push((adj[u].len() as f64, adj[v.index()].len() as f64));
                }
            }
        }
        _ => {
            for (u, v) in g.edges() {
                let (x, y) = match mode {
                    AssortativityMode::OutIn => (out_deg(u), in_deg(v)),
                    AssortativityMode::OutOut => (out_deg(u), out_deg(v)),
                    AssortativityMode::InIn => (in_deg(u), in_deg(v)),
                    AssortativityMode::InOut => (in_deg(u), out_deg(v)),
                    AssortativityMode::Undirected => unreachable!(),
                };
                pairs.push((x, y));
            }
        }
    }
    pearson(&pairs)
}

fn pearson(pairs: &[(f64, f64)]) -> (f64, bool) {
    if pairs.is_empty() {
        return (0.0, true);
    }
    let m = pairs.len() as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / m;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in pairs {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    let denom = (sxx * syy).sqrt();
    if denom <= f64::EPSILON * m || !denom.is_finite() {
        (0.0, true)
    } else {
        (sxy / denom, false)
    }
}

/// Local clustering coefficient of every node on the undirected view.
/// Nodes with fewer than two neighbors get 0.
pub fn local_clustering(g: &DirectedGraph) -> Vec<f64> {
    let adj = g.undirected_adjacency();
    adj.iter()
        .map(|nbrs| {
            let d = nbrs.len();
            if d < 2 {
                return 0.0;
            }
            let mut links = 0usize;
            for (i, &v) in nbrs.iter().enumerate() {
                links += sorted_intersection_count(&nbrs[i + 1..], &adj[v.index()]);
            }
            links as f64 / (d * (d - 1) / 2) as f64
        })
        .collect()
}

/// Network average clustering coefficient.
pub fn average_clustering(g: &DirectedGraph) -> f64 {
    let local = local_clustering(g);
    if local.is_empty() {
        0.0
    } else {
        local.iter().sum::<f64>() / local.len() as f64
    }
}

fn sorted_intersection_count(a: &[NodeId], b: &[NodeId]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// Strongly connected components via an iterative Tarjan traversal.
/// Components are returned in reverse topological order.
pub fn strongly_connected_components(g: &DirectedGraph) -> Vec<Vec<NodeId>> {
    const UNSEEN: usize = usize::MAX;
    let n = g.node_count();
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut components = Vec::new();
    let mut next_index = 0;
    // (node, position in its successor list)
    let mut call: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        call.push((root, 0));
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (u, ref mut pos)) = call.last_mut() {
            let succ = g.successors(NodeId::from(u));
            if *pos < succ.len() {
                let v = succ[*pos].index();
                *pos += 1;
                if index[v] == UNSEEN {
                    index[v] = next_index;
                    low[v] = next_index;
                    next_index += 1;
                    stack.push(v);
                    on_stack[v] = true;
                    call.push((v, 0));
                } else if on_stack[v] {
                    low[u] = low[u].min(index[v]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[u]);
            }
            if low[u] == index[u] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack underflow");
                    on_stack[w] = false;
                    comp.push(NodeId::from(w));
                    if w == u {
                        break;
                    }
                }
                comp.sort_unstable();
                components.push(comp);
            }
        }
    }
    components
}

impl GraphStats {
    /// Machine-readable `key=value` lines in column order.
    pub fn to_key_value(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "nodes={}", self.node_count);
        let _ = writeln!(s, "visited={}", self.visited_count);
        let _ = writeln!(s, "edges={}", self.edge_count);
        let _ = writeln!(s, "assortativity={}", self.assortativity);
        let _ = writeln!(s, "assortativity_mode={}", self.assortativity_mode.name());
        let _ = writeln!(
            s,
            "assortativity_degenerate={}",
            self.assortativity_degenerate
        );
        let _ = writeln!(s, "avg_degree={}", self.avg_degree);
        let _ = writeln!(s, "avg_total_degree={}", self.avg_total_degree);
        let _ = writeln!(s, "ncc={}", self.ncc);
        let _ = writeln!(s, "scc_fraction={}", self.scc_fraction);
        s
    }

    /// One-row human-readable table with a header.
    pub fn to_table(&self, label: &str) -> String {
        format!(
            "{:<8} {:>10} {:>8} {:>10} {:>8} {:>6} {:>6} {:>6} {:>6}\n{:<8} {:>10} {:>8} {:>10} {:>8.3} {:>6.2} {:>6.2} {:>6.2} {:>6.3}\n",
            "Graph", "|V|", "|V*|", "|E|", "Assort.", "Deg.", "Deg/2", "NCC", "SCC",
            label,
            self.node_count,
            self.visited_count,
            self.edge_count,
            self.assortativity,
            self.avg_total_degree,
            self.avg_degree,
            self.ncc,
            self.scc_fraction,
        )
    }
}

//! Directed follow graph with dense node ids.
//!
//! An edge `(u, v)` means `u` follows `v`. Every node carries an opaque
//! external key (usually `user@instance`) and a `visited` flag that is set
//! when both its following and follower lists are fully known.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Dense node index in `[0, node_count)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for NodeId {
    fn from(i: usize) -> Self {
        NodeId(u32::try_from(i).expect("node index exceeds u32"))
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("line {line}: expected 2 tab-separated fields, found {found}")]
    Parse { line: usize, found: usize },
    #[error("node {0} out of range (node_count = {1})")]
    OutOfRange(NodeId, usize),
    #[error("graph is empty")]
    Empty,
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Which adjacency to count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DegreeMode {
    In,
    Out,
    /// Undirected view: `|out ∪ in|`, a reciprocated pair counts once.
    Total,
}

/// Immutable directed graph with sorted, duplicate-free forward and reverse
/// adjacency lists and no self-loops.
#[derive(Clone, Debug)]
pub struct DirectedGraph {
    keys: Vec<String>,
    index: HashMap<String, NodeId>,
    out_adj: Vec<Vec<NodeId>>,
    in_adj: Vec<Vec<NodeId>>,
    visited: Vec<bool>,
    edge_count: usize,
}

/// Counters reported by [`load_edge_list`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LoadReport {
    pub lines: usize,
    pub self_loops_dropped: usize,
    pub duplicates_collapsed: usize,
}

/// Incremental construction of a [`DirectedGraph`].
#[derive(Debug, Default)]
pub struct GraphBuilder {
    keys: Vec<String>,
    index: HashMap<String, NodeId>,
    edges: Vec<(NodeId, NodeId)>,
    visited: Option<Vec<bool>>,
    self_loops: usize,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the id for `key`, creating the node on first sight.
    pub fn intern(&mut self, key: &str) -> NodeId {
        if let Some(&id) = self.index.get(key) {
            return id;
        }
        let id = NodeId::from(self.keys.len());
        self.keys.push(key.to_owned());
        self.index.insert(key.to_owned(), id);
        if let Some(v) = self.visited.as_mut() {
            v.push(false);
        }
        id
    }

    /// Adds `src -> dst`. Self-loops are counted and dropped without
    /// creating nodes.
    pub fn add_edge(&mut self, src: &str, dst: &str) {
        if src == dst {
            self.self_loops += 1;
            return;
        }
        let s = self.intern(src);
        let d = self.intern(dst);
        self.edges.push((s, d));
    }

    pub fn add_edge_ids(&mut self, src: NodeId, dst: NodeId) {
        if src == dst {
            self.self_loops += 1;
            return;
        }
        self.edges.push((src, dst));
    }

    /// Marks `id` as visited. Once any node is marked, unmarked nodes are
    /// treated as unvisited; if no node is ever marked every node counts as
    /// visited.
    pub fn mark_visited(&mut self, id: NodeId) {
        let n = self.keys.len();
        let v = self.visited.get_or_insert_with(|| vec![false; n]);
        v[id.index()] = true;
    }

    pub fn node_count(&self) -> usize {
        self.keys.len()
    }

    pub fn build(self) -> (DirectedGraph, LoadReport) {
        let n = self.keys.len();
        let mut out_adj = vec![Vec::new(); n];
        let mut in_adj = vec![Vec::new(); n];
        let raw = self.edges.len();
        for &(s, d) in &self.edges {
            out_adj[s.index()].push(d);
            in_adj[d.index()].push(s);
        }
        let mut edge_count = 0;
        for list in out_adj.iter_mut() {
            list.sort_unstable();
            list.dedup();
            edge_count += list.len();
        }
        for list in in_adj.iter_mut() {
            list.sort_unstable();
            list.dedup();
        }
        let visited = self.visited.unwrap_or_else(|| vec![true; n]);
        let report = LoadReport {
            lines: 0,
            self_loops_dropped: self.self_loops,
            duplicates_collapsed: raw - edge_count,
        };
        (
            DirectedGraph {
                keys: self.keys,
                index: self.index,
                out_adj,
                in_adj,
                visited,
                edge_count,
            },
            report,
        )
    }
}

/// Reads a `src<TAB>dst` edge list. Blank lines and lines starting with `#`
/// are skipped. All nodes of the result are marked visited.
pub fn load_edge_list<R: BufRead>(source: R) -> Result<(DirectedGraph, LoadReport), GraphError> {
    let mut builder = GraphBuilder::new();
    let mut lines = 0;
    for (i, line) in source.lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        lines += 1;
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 2 || fields.iter().any(|f| f.is_empty()) {
            return Err(GraphError::Parse {
                line: i + 1,
                found: fields.len(),
            });
        }
        builder.add_edge(fields[0], fields[1]);
    }
    let (g, mut report) = builder.build();
    report.lines = lines;
    Ok((g, report))
}

impl DirectedGraph {
    pub fn empty() -> Self {
        GraphBuilder::new().build().0
    }

    pub fn node_count(&self) -> usize {
        self.keys.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.keys.len()).map(NodeId::from)
    }

    pub fn key(&self, id: NodeId) -> &str {
        &self.keys[id.index()]
    }

    pub fn keys(&self) -> &[String] {
        &self.keys
    }

    pub fn id_of(&self, key: &str) -> Option<NodeId> {
        self.index.get(key).copied()
    }

    pub fn successors(&self, u: NodeId) -> &[NodeId] {
        &self.out_adj[u.index()]
    }

    pub fn predecessors(&self, u: NodeId) -> &[NodeId] {
        &self.in_adj[u.index()]
    }

    pub fn is_visited(&self, u: NodeId) -> bool {
        self.visited[u.index()]
    }

    pub fn visited_count(&self) -> usize {
        self.visited.iter().filter(|&&v| v).count()
    }

    pub fn visited_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes().filter(|&u| self.is_visited(u))
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.out_adj[u.index()].binary_search(&v).is_ok()
    }

    fn check(&self, u: NodeId) -> Result<(), GraphError> {
        if u.index() < self.node_count() {
            Ok(())
        } else {
            Err(GraphError::OutOfRange(u, self.node_count()))
        }
    }

    pub fn degree(&self, u: NodeId, mode: DegreeMode) -> Result<usize, GraphError> {
        self.check(u)?;
        Ok(match mode {
            DegreeMode::Out => self.out_adj[u.index()].len(),
            DegreeMode::In => self.in_adj[u.index()].len(),
            DegreeMode::Total => merged_len(&self.out_adj[u.index()], &self.in_adj[u.index()]),
        })
    }

    /// Sorted neighbors of `u` in the undirected view.
    pub fn undirected_neighbors(&self, u: NodeId) -> Vec<NodeId> {
        let (a, b) = (&self.out_adj[u.index()], &self.in_adj[u.index()]);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            let next = match (a.get(i), b.get(j)) {
                (Some(&x), Some(&y)) if x == y => {
                    i += 1;
                    j += 1;
                    x
                }
                (Some(&x), Some(&y)) if x < y => {
                    i += 1;
                    x
                }
                (Some(_), Some(&y)) => {
                    j += 1;
                    y
                }
                (Some(&x), None) => {
                    i += 1;
                    x
                }
                (None, Some(&y)) => {
                    j += 1;
                    y
                }
                (None, None) => unreachable!(),
            };
            out.push(next);
        }
        out
    }

    /// Undirected adjacency for all nodes.
    pub fn undirected_adjacency(&self) -> Vec<Vec<NodeId>> {
        self.nodes().map(|u| self.undirected_neighbors(u)).collect()
    }

    /// All edges as `(src, dst)` pairs in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.out_adj
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().map(move |&v| (NodeId::from(u), v)))
    }

    /// Edges as external-key pairs; equal for graphs that differ only in id
    /// assignment.
    pub fn keyed_edges(&self) -> BTreeSet<(&str, &str)> {
        self.edges()
            .map(|(u, v)| (self.key(u), self.key(v)))
            .collect()
    }

    /// Writes the graph as a `src<TAB>dst` edge list, sorted by key.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (s, d) in self.keyed_edges() {
            writeln!(out, "{s}\t{d}")?;
        }
        Ok(())
    }

    /// Returns a copy whose visited flags are exactly the nodes whose keys are
    /// in `visited`. Keys not present in the graph are added as isolated
    /// nodes.
    pub fn with_visited<'a, I>(&self, visited: I) -> DirectedGraph
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut g = self.clone();
        g.visited = vec![false; g.node_count()];
        for key in visited {
            let id = match g.index.get(key) {
                Some(&id) => id,
                None => {
                    let id = NodeId::from(g.keys.len());
                    g.keys.push(key.to_owned());
                    g.index.insert(key.to_owned(), id);
                    g.out_adj.push(Vec::new());
                    g.in_adj.push(Vec::new());
                    g.visited.push(false);
                    id
                }
            };
            g.visited[id.index()] = true;
        }
        g
    }
}

fn merged_len(a: &[NodeId], b: &[NodeId]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
        n += 1;
    }
    n + (a.len() - i) + (b.len() - j)
}

/// Follows added between two snapshots, keyed by external key.
///
/// Only nodes present in both graphs are considered; removed edges are
/// ignored and nodes whose difference is empty are omitted.
pub fn diff_edges(
    older: &DirectedGraph,
    newer: &DirectedGraph,
) -> BTreeMap<String, BTreeSet<String>> {
    let mut out = BTreeMap::new();
    for u_new in newer.nodes() {
        let key = newer.key(u_new);
        let Some(u_old) = older.id_of(key) else {
            continue;
        };
        let added: BTreeSet<String> = newer
            .successors(u_new)
            .iter()
            .map(|&v| newer.key(v))
            .filter(|vk| match older.id_of(vk) {
                Some(v_old) => !older.has_edge(u_old, v_old),
                None => true,
            })
            .map(str::to_owned)
            .collect();
        if !added.is_empty() {
            out.insert(key.to_owned(), added);
        }
    }
    out
}

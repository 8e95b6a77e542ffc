#![allow(dead_code)]

use fedrec::{DirectedGraph, GraphBuilder, NodeId};
use proptest::prelude::*;

/// Graph on `n` nodes named `n00`, `n01`, … with ids in name order.
pub fn graph(n: usize, edges: &[(usize, usize)]) -> DirectedGraph {
    let mut b = GraphBuilder::new();
    for i in 0..n {
        b.intern(&format!("n{i:02}"));
    }
    for &(u, v) in edges {
        b.add_edge_ids(NodeId::from(u), NodeId::from(v));
    }
    b.build().0
}

/// `(node count, edge list)` with possible self-loops and duplicates.
pub fn edges(
    max_nodes: usize,
    max_edges: usize,
) -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
    (2..=max_nodes)
        .prop_flat_map(move |n| (Just(n), prop::collection::vec((0..n, 0..n), 0..=max_edges)))
}

pub fn arb_graph(max_nodes: usize, max_edges: usize) -> impl Strategy<Value = DirectedGraph> {
    edges(max_nodes, max_edges).prop_map(|(n, e)| graph(n, &e))
}

//! Uniform random baseline.

use rand::seq::index::sample;

use crate::graph::{DirectedGraph, NodeId};
use crate::rank::{exclusion_mask, RankedList, Recommender, Scored};
use crate::seed::rng_from;

/// Draws `k` users uniformly without replacement from the whole topology,
/// skipping the target and (optionally) its current followees. Entries keep
/// the draw order and carry descending rank scores `m, m-1, …, 1`.
#[derive(Clone, Copy, Debug)]
pub struct RandomRecommender<'g> {
    pub graph: &'g DirectedGraph,
    pub exclude_followees: bool,
}

impl<'g> RandomRecommender<'g> {
    pub fn new(graph: &'g DirectedGraph) -> Self {
        RandomRecommender {
            graph,
            exclude_followees: true,
        }
    }
}

pub fn recommend_random(
    g: &DirectedGraph,
    target: NodeId,
    k: usize,
    rng_seed: u64,
    exclude_followees: bool,
) -> RankedList {
    let mask = exclusion_mask(g, target, exclude_followees);
    let eligible: Vec<NodeId> = g.nodes().filter(|u| !mask[u.index()]).collect();
    let m = k.min(eligible.len());
    let mut rng = rng_from(rng_seed);
    let entries = sample(&mut rng, eligible.len(), m)
        .into_iter()
        .enumerate()
        .map(|(rank, i)| Scored {
            node: eligible[i],
            score: (m - rank) as f64,
        })
        .collect();
    RankedList {
        target,
        k,
        entries,
        flags: Default::default(),
    }
}

impl Recommender for RandomRecommender<'_> {
    fn name(&self) -> String {
        "random".to_owned()
    }

    fn recommend(&self, target: NodeId, k: usize, rng_seed: u64) -> RankedList {
        recommend_random(self.graph, target, k, rng_seed, self.exclude_followees)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::load_edge_list;

    #[test]
    fn everything_followed_gives_empty_list() {
        let g = load_edge_list("a\tb\na\tc".as_bytes()).unwrap().0;
        let list = recommend_random(&g, g.id_of("a").unwrap(), 10, 1, true);
        assert!(list.is_empty());
    }

    #[test]
    fn seeded_and_filtered() {
        let mut s = String::new();
        for i in 0..50 {
            s.push_str(&format!("u{i}\tu{}\n", (i + 1) % 50));
        }
        let g = load_edge_list(s.as_bytes()).unwrap().0;
        let t = g.id_of("u0").unwrap();
        let a = recommend_random(&g, t, 20, 9, true);
        let b = recommend_random(&g, t, 20, 9, true);
        assert_eq!(a, b);
        assert_eq!(a.len(), 20);
        let followee = g.id_of("u1").unwrap();
        assert!(a.entries.iter().all(|e| e.node != t && e.node != followee));
        assert!(a.entries.windows(2).all(|w| w[0].score > w[1].score));
    }

    #[test]
    fn short_list_when_few_eligible() {
        let g = load_edge_list("a\tb\nc\td".as_bytes()).unwrap().0;
        let list = recommend_random(&g, g.id_of("a").unwrap(), 10, 0, true);
        assert_eq!(list.len(), 2);
    }
}

//! Profile-based collaborative filtering.
//!
//! Every visited user becomes a document whose terms are user ids (the
//! accounts it follows, its followers, or both). A target user's own
//! document is issued as a query and the other documents are ranked by
//! BM25.

use std::collections::HashMap;

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{DirectedGraph, NodeId};
use crate::rank::{exclusion_mask, top_k, RankedList, Recommender, Scored};
use crate::seed::rng_from;

/// Queries longer than this are randomly subsampled.
pub const DEFAULT_MAX_QUERY_TERMS: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileStrategy {
    Following,
    Followers,
    Combined,
}

impl ProfileStrategy {
    pub const ALL: [ProfileStrategy; 3] = [
        ProfileStrategy::Following,
        ProfileStrategy::Followers,
        ProfileStrategy::Combined,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProfileStrategy::Following => "following",
            ProfileStrategy::Followers => "followers",
            ProfileStrategy::Combined => "combined",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UserProfile {
    pub owner: NodeId,
    pub strategy: ProfileStrategy,
    /// Sorted, duplicate-free, never contains `owner`.
    pub tokens: Vec<NodeId>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CfError {
    #[error("document {0} is not indexed")]
    UnknownDocument(NodeId),
}

/// Profiles of every visited node with at least one token.
pub fn build_profiles(g: &DirectedGraph, strategy: ProfileStrategy) -> Vec<UserProfile> {
    g.visited_nodes()
        .filter_map(|u| {
            let mut tokens = match strategy {
                ProfileStrategy::Following => g.successors(u).to_vec(),
                ProfileStrategy::Followers => g.predecessors(u).to_vec(),
                ProfileStrategy::Combined => g.undirected_neighbors(u),
            };
            tokens.retain(|&t| t != u);
            (!tokens.is_empty()).then_some(UserProfile {
                owner: u,
                strategy,
                tokens,
            })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Bm25Params { k1: 1.2, b: 0.75 }
    }
}

/// `ln(1 + (N - df + 0.5) / (df + 0.5))`, positive for every `df` in `[0, N]`.
pub fn bm25_idf(doc_count: usize, df: usize) -> f64 {
    let (n, df) = (doc_count as f64, df as f64);
    (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
}

/// Contribution of one matching term to a document's score.
pub fn bm25_term(
    tf: u32,
    df: usize,
    doc_count: usize,
    doc_len: u32,
    avg_len: f64,
    p: Bm25Params,
) -> f64 {
    if tf == 0 {
        return 0.0;
    }
    let tf = f64::from(tf);
    let norm = p.k1 * (1.0 - p.b + p.b * f64::from(doc_len) / avg_len);
    bm25_idf(doc_count, df) * tf * (p.k1 + 1.0) / (tf + norm)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Posting {
    slot: u32,
    tf: u32,
}

/// Inverted index over user profiles.
#[derive(Clone, Debug)]
pub struct ProfileIndex {
    params: Bm25Params,
    owners: Vec<NodeId>,
    slot_of: HashMap<NodeId, u32>,
    doc_tokens: Vec<Vec<NodeId>>,
    doc_lengths: Vec<u32>,
    avg_doc_length: f64,
    postings: HashMap<NodeId, Vec<Posting>>,
}

impl ProfileIndex {
    pub fn build(profiles: &[UserProfile], params: Bm25Params) -> Self {
        Self::from_documents(profiles.iter().map(|p| (p.owner, p.tokens.clone())), params)
    }

    /// Indexes arbitrary token bags; repeated tokens raise the term frequency.
    pub fn from_documents<I>(docs: I, params: Bm25Params) -> Self
    where
        I: IntoIterator<Item = (NodeId, Vec<NodeId>)>,
    {
        let mut index = ProfileIndex {
            params,
            owners: Vec::new(),
            slot_of: HashMap::new(),
            doc_tokens: Vec::new(),
            doc_lengths: Vec::new(),
            avg_doc_length: 0.0,
            postings: HashMap::new(),
        };
        for (owner, tokens) in docs {
            let slot = index.owners.len() as u32;
            index.owners.push(owner);
            index.slot_of.insert(owner, slot);
            index.doc_lengths.push(tokens.len() as u32);
            let mut tf: HashMap<NodeId, u32> = HashMap::new();
            for &t in &tokens {
                *tf.entry(t).or_default() += 1;
            }
            let mut terms: Vec<_> = tf.into_iter().collect();
            terms.sort_unstable();
            for (term, tf) in terms {
                index
                    .postings
                    .entry(term)
                    .or_default()
                    .push(Posting { slot, tf });
            }
            index.doc_tokens.push(tokens);
        }
        let total: u64 = index.doc_lengths.iter().map(|&l| u64::from(l)).sum();
        index.avg_doc_length = if index.owners.is_empty() {
            0.0
        } else {
            total as f64 / index.owners.len() as f64
        };
        index
    }

    pub fn params(&self) -> Bm25Params {
        self.params
    }

    pub fn doc_count(&self) -> usize {
        self.owners.len()
    }

    pub fn avg_doc_length(&self) -> f64 {
        self.avg_doc_length
    }

    pub fn documents(&self) -> &[NodeId] {
        &self.owners
    }

    pub fn doc_length(&self, doc: NodeId) -> Option<u32> {
        self.slot_of
            .get(&doc)
            .map(|&s| self.doc_lengths[s as usize])
    }

    /// Indexed tokens of `doc`, which double as its query.
    pub fn document(&self, doc: NodeId) -> Option<&[NodeId]> {
        self.slot_of
            .get(&doc)
            .map(|&s| self.doc_tokens[s as usize].as_slice())
    }

    pub fn document_frequency(&self, term: NodeId) -> usize {
        self.postings.get(&term).map_or(0, Vec::len)
    }

    pub fn term_frequency(&self, term: NodeId, doc: NodeId) -> u32 {
        let (Some(list), Some(&slot)) = (self.postings.get(&term), self.slot_of.get(&doc)) else {
            return 0;
        };
        list.binary_search_by_key(&slot, |p| p.slot)
            .map_or(0, |i| list[i].tf)
    }

    /// BM25 score of a single document. Query terms count once each.
    pub fn bm25_score(&self, query: &[NodeId], doc: NodeId) -> Result<f64, CfError> {
        let &slot = self
            .slot_of
            .get(&doc)
            .ok_or(CfError::UnknownDocument(doc))?;
        let len = self.doc_lengths[slot as usize];
        Ok(query
            .iter()
            .map(|&t| {
                let tf = self.term_frequency(t, doc);
                bm25_term(
                    tf,
                    self.document_frequency(t),
                    self.doc_count(),
                    len,
                    self.avg_doc_length,
                    self.params,
                )
            })
            .sum())
    }

    /// Scores of every document against `query`, indexed by slot, in one
    /// pass over the postings.
    fn score_all(&self, query: &[NodeId]) -> Vec<f64> {
        let mut acc = vec![0.0; self.owners.len()];
        let n = self.doc_count();
        for t in query {
            let Some(list) = self.postings.get(t) else {
                continue;
            };
            let df = list.len();
            for p in list {
                acc[p.slot as usize] += bm25_term(
                    p.tf,
                    df,
                    n,
                    self.doc_lengths[p.slot as usize],
                    self.avg_doc_length,
                    self.params,
                );
            }
        }
        acc
    }
}

/// Collaborative-filtering recommender over a [`ProfileIndex`].
#[derive(Clone, Debug)]
pub struct CfRecommender<'g> {
    pub graph: &'g DirectedGraph,
    pub index: ProfileIndex,
    pub strategy: ProfileStrategy,
    pub exclude_followees: bool,
    pub max_query_terms: usize,
}

impl<'g> CfRecommender<'g> {
    pub fn new(graph: &'g DirectedGraph, strategy: ProfileStrategy, params: Bm25Params) -> Self {
        let profiles = build_profiles(graph, strategy);
        CfRecommender {
            graph,
            index: ProfileIndex::build(&profiles, params),
            strategy,
            exclude_followees: true,
            max_query_terms: DEFAULT_MAX_QUERY_TERMS,
        }
    }

    /// The query issued for `target`, subsampled to `max_query_terms`.
    pub fn query_for(&self, target: NodeId, rng_seed: u64) -> Option<Vec<NodeId>> {
        let tokens = self.index.document(target)?;
        if tokens.len() <= self.max_query_terms {
            return Some(tokens.to_vec());
        }
        let mut rng = rng_from(rng_seed);
        let mut picked: Vec<usize> =
            sample(&mut rng, tokens.len(), self.max_query_terms).into_vec();
        picked.sort_unstable();
        Some(picked.into_iter().map(|i| tokens[i]).collect())
    }
}

/// Ranks indexed profiles for `target`. Only documents sharing at least one
/// term with the query (positive score) are candidates.
pub fn recommend_cf(cf: &CfRecommender<'_>, target: NodeId, k: usize, rng_seed: u64) -> RankedList {
    let Some(query) = cf.query_for(target, rng_seed) else {
        let mut list = RankedList::empty(target, k);
        list.flags.unprofiled = true;
        return list;
    };
    let mask = exclusion_mask(cf.graph, target, cf.exclude_followees);
    let scores = cf.index.score_all(&query);
    let candidates = cf
        .index
        .owners
        .iter()
        .zip(scores)
        .filter(|&(&u, s)| s > 0.0 && !mask.get(u.index()).copied().unwrap_or(false))
        .map(|(&node, score)| Scored { node, score })
        .collect();
    RankedList {
        target,
        k,
        entries: top_k(candidates, k),
        flags: Default::default(),
    }
}

impl Recommender for CfRecommender<'_> {
    fn name(&self) -> String {
        format!("cf:{}", self.strategy.name())
    }

    fn recommend(&self, target: NodeId, k: usize, rng_seed: u64) -> RankedList {
        recommend_cf(self, target, k, rng_seed)
    }
}

//! Who-to-follow recommendation for federated follow graphs.
//!
//! The crate covers the whole offline pipeline: a polite crawler over
//! per-instance follower APIs ([`federation`]), Metropolis–Hastings and
//! egocentric random-walk sampling ([`sampler`]), BM25 profile matching
//! ([`cf`]) and personalized PageRank ([`ppr`]) recommenders, and temporal
//! plus interleaved evaluation ([`eval`]).

pub mod baseline;
pub mod cf;
pub mod eval;
pub mod federation;
pub mod graph;
pub mod io;
pub mod ppr;
pub mod rank;
pub mod sampler;
pub mod seed;
pub mod special;
pub mod stats;
pub mod synth;

pub use baseline::RandomRecommender;
pub use cf::{Bm25Params, CfRecommender, ProfileIndex, ProfileStrategy, UserProfile};
pub use eval::{build_snapshot_pair, run_experiment, EvalReport, ExperimentConfig, SnapshotPair};
pub use graph::{
    diff_edges, load_edge_list, DegreeMode, DirectedGraph, GraphBuilder, GraphError, NodeId,
};
pub use ppr::{PprConfig, PprRecommender, PprVector};
pub use rank::{RankedList, Recommender, Scored};
pub use stats::{compute_stats, GraphStats};

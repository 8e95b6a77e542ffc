//! Offline temporal evaluation and online interleaved comparison.

mod experiment;
mod interleave;
mod metrics;
mod snapshot;
mod ttest;

use thiserror::Error;

pub use experiment::{
    evaluate_rankings, run_experiment, CurvePoint, EvalReport, ExperimentConfig, SystemReport,
    TargetMetrics,
};
pub use interleave::{
    attribute_clicks, balanced_interleave, balanced_interleave_from, Attribution, InterleavedList,
    Origin, Side, Verdict,
};
pub use metrics::{
    average_precision, precision_at, random_success_expectation, success_at, MetricSet,
};
pub use snapshot::{build_snapshot_pair, SnapshotPair};
pub use ttest::{paired_t_test, Degeneracy, Mark, SignificanceMark, TTest, SIGNIFICANCE_LEVEL};

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("relevant set is empty")]
    EmptyRelevant,
    #[error("cutoff k must be at least 1")]
    ZeroCutoff,
    #[error("paired samples need equal lengths, got {0} and {1}")]
    LengthMismatch(usize, usize),
    #[error("paired t-test needs at least 2 pairs, got {0}")]
    TooFewPairs(usize),
    #[error("clicked item at click index {0} is not in the interleaved list")]
    UnknownClick(usize),
    #[error("interleaved item at rank {0} appears in neither input list")]
    ForeignItem(usize),
    #[error("input list {0:?} contains duplicates")]
    DuplicateItems(Side),
    #[error("no systems to evaluate")]
    NoSystems,
    #[error("system {system} has no list for evaluation target {target}")]
    MissingTarget { system: String, target: String },
    #[error("system {system} has a list for {target}, which is not an evaluation target")]
    UnexpectedTarget { system: String, target: String },
}

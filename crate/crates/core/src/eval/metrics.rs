use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::EvalError;

/// `(1/|R|) Σ_{i : recs[i] ∈ R} hits(i) / i` with 1-based ranks; relevant
/// items never retrieved contribute zero.
pub fn average_precision<T: Ord>(recs: &[T], relevant: &BTreeSet<T>) -> Result<f64, EvalError> {
    if relevant.is_empty() {
        return Err(EvalError::EmptyRelevant);
    }
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (i, r) in recs.iter().enumerate() {
        if relevant.contains(r) {
            hits += 1;
            sum += hits as f64 / (i + 1) as f64;
        }
    }
    Ok(sum / relevant.len() as f64)
}

/// `|top-k ∩ R| / k`. The divisor stays `k` for lists shorter than `k`.
pub fn precision_at<T: Ord>(
    recs: &[T],
    relevant: &BTreeSet<T>,
    k: usize,
) -> Result<f64, EvalError> {
    if k == 0 {
        return Err(EvalError::ZeroCutoff);
    }
    let hits = recs.iter().take(k).filter(|r| relevant.contains(r)).count();
    Ok(hits as f64 / k as f64)
}

/// 1 when the top `k` contain at least one relevant item.
pub fn success_at<T: Ord>(recs: &[T], relevant: &BTreeSet<T>, k: usize) -> Result<f64, EvalError> {
    if k == 0 {
        return Err(EvalError::ZeroCutoff);
    }
    Ok(if recs.iter().take(k).any(|r| relevant.contains(r)) {
        1.0
    } else {
        0.0
    })
}

/// Metrics of one ranked list against one relevant set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricSet {
    pub average_precision: f64,
    pub success_at: BTreeMap<usize, f64>,
    pub precision_at: BTreeMap<usize, f64>,
}

impl MetricSet {
    pub fn compute<T: Ord>(
        recs: &[T],
        relevant: &BTreeSet<T>,
        ks: &[usize],
    ) -> Result<Self, EvalError> {
        let mut s = BTreeMap::new();
        let mut p = BTreeMap::new();
        for &k in ks {
            s.insert(k, success_at(recs, relevant, k)?);
            p.insert(k, precision_at(recs, relevant, k)?);
        }
        Ok(MetricSet {
            average_precision: average_precision(recs, relevant)?,
            success_at: s,
            precision_at: p,
        })
    }

    pub fn zero(ks: &[usize]) -> Self {
        MetricSet {
            average_precision: 0.0,
            success_at: ks.iter().map(|&k| (k, 0.0)).collect(),
            precision_at: ks.iter().map(|&k| (k, 0.0)).collect(),
        }
    }
}

/// Probability that `k` items drawn uniformly without replacement from a
/// pool of `pool` contain at least one of `relevant` marked items:
/// `1 - C(pool - relevant, k) / C(pool, k)`.
pub fn random_success_expectation(pool: usize, relevant: usize, k: usize) -> f64 {
    let k = k.min(pool);
    let relevant = relevant.min(pool);
    let mut miss = 1.0;
    for i in 0..k {
        let remaining = pool - i;
        let bad = (pool - relevant).saturating_sub(i);
        miss *= bad as f64 / remaining as f64;
        if miss == 0.0 {
            break;
        }
    }
    1.0 - miss
}

//! Offline evaluation of several recommenders on one snapshot pair.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::MetricSet;
use super::snapshot::SnapshotPair;
use super::ttest::{paired_t_test, SignificanceMark, SIGNIFICANCE_LEVEL};
use super::EvalError;
use crate::graph::NodeId;
use crate::rank::{RankFlags, RankedList, Recommender};
use crate::seed::derive_seed;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    /// Length of every generated list.
    pub k: usize,
    /// Cutoffs reported for s@k and p@k.
    pub report_ks: Vec<usize>,
    /// The p@k curve covers `1..=curve_max_k`.
    pub curve_max_k: usize,
    pub master_seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            k: 100,
            report_ks: vec![1, 5, 10],
            curve_max_k: 100,
            master_seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetMetrics {
    pub target: String,
    pub relevant: usize,
    pub returned: usize,
    pub flags: RankFlags,
    pub metrics: MetricSet,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemReport {
    pub system: String,
    pub map: f64,
    pub success_at: BTreeMap<usize, f64>,
    pub precision_at: BTreeMap<usize, f64>,
    /// Targets whose list came back empty or flagged; they score zero.
    pub failed_targets: usize,
    /// Tests of this row against the previous row, one per metric column.
    /// Empty for the first row.
    pub significance: Vec<SignificanceMark>,
    pub targets: Vec<TargetMetrics>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub k: usize,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub config: ExperimentConfig,
    pub n_targets: usize,
    pub systems: Vec<SystemReport>,
    /// Mean p@k per system for `k = 1..=curve_max_k`.
    pub curves: BTreeMap<String, Vec<CurvePoint>>,
    pub warnings: Vec<String>,
}

/// Generates a list per target and system, then scores them.
///
/// Each call to a recommender gets the seed
/// `derive_seed(master_seed, system name, target id)`, so results do not
/// depend on scheduling or on which other systems run.
pub fn run_experiment(
    pair: &SnapshotPair,
    systems: &[&dyn Recommender],
    cfg: &ExperimentConfig,
) -> Result<EvalReport, EvalError> {
    if systems.is_empty() {
        return Err(EvalError::NoSystems);
    }
    let runs: Vec<(String, Vec<RankedList>)> = systems
        .iter()
        .map(|sys| {
            let name = sys.name();
            let lists = pair
                .eval_targets
                .par_iter()
                .map(|&t| sys.recommend(t, cfg.k, derive_seed(cfg.master_seed, &name, t.0 as u64)))
                .collect();
            (name, lists)
        })
        .collect();
    evaluate_rankings(pair, &runs, cfg)
}

/// Scores precomputed lists. `runs[i].1` must hold one list per evaluation
/// target, in any order.
pub fn evaluate_rankings(
    pair: &SnapshotPair,
    runs: &[(String, Vec<RankedList>)],
    cfg: &ExperimentConfig,
) -> Result<EvalReport, EvalError> {
    if runs.is_empty() {
        return Err(EvalError::NoSystems);
    }
    if cfg.k == 0 || cfg.report_ks.contains(&0) {
        return Err(EvalError::ZeroCutoff);
    }
    let mut warnings = pair.warnings.clone();
    let mut systems: Vec<SystemReport> = Vec::with_capacity(runs.len());
    let mut curves = BTreeMap::new();
    for (name, lists) in runs {
        let by_target: BTreeMap<NodeId, &RankedList> =
            lists.iter().map(|l| (l.target, l)).collect();
        let targets: Vec<TargetMetrics> = pair
            .eval_targets
            .par_iter()
            .map(|t| {
                let rel = &pair.relevance[t];
                let list = by_target.get(t).ok_or_else(|| EvalError::MissingTarget {
                    system: name.clone(),
                    target: pair.key(*t).to_owned(),
                })?;
                let recs: Vec<NodeId> = list.nodes().into_iter().take(cfg.k).collect();
                Ok(TargetMetrics {
                    target: pair.key(*t).to_owned(),
                    relevant: rel.len(),
                    returned: recs.len(),
                    flags: list.flags,
                    metrics: MetricSet::compute(&recs, rel, &cfg.report_ks)?,
                })
            })
            .collect::<Result<_, EvalError>>()?;
        if let Some(extra) = by_target.keys().find(|t| !pair.relevance.contains_key(t)) {
            return Err(EvalError::UnexpectedTarget {
                system: name.clone(),
                target: pair.key(*extra).to_owned(),
            });
        }
        let failed = targets
            .iter()
            .filter(|t| t.returned == 0 || t.flags.unprofiled || t.flags.not_converged)
            .count();
        if failed > 0 {
            warnings.push(format!(
                "{name}: {failed} target(s) returned an empty or flagged list"
            ));
        }
        let curve = precision_curve(pair, &by_target, cfg.curve_max_k);
        curves.insert(name.clone(), curve);
        let n = targets.len().max(1) as f64;
        let mean = |f: &dyn Fn(&TargetMetrics) -> f64| targets.iter().map(f).sum::<f64>() / n;
        let map = mean(&|t| t.metrics.average_precision);
        let success_at = cfg
            .report_ks
            .iter()
            .map(|&k| (k, mean(&|t| t.metrics.success_at[&k])))
            .collect();
        let precision_at = cfg
            .report_ks
            .iter()
            .map(|&k| (k, mean(&|t| t.metrics.precision_at[&k])))
            .collect();
        let significance = match systems.last() {
            Some(prev) if targets.len() >= 2 => compare(prev, name, &targets, cfg)?,
            _ => Vec::new(),
        };
        systems.push(SystemReport {
            system: name.clone(),
            map,
            success_at,
            precision_at,
            failed_targets: failed,
            significance,
            targets,
        });
    }
    Ok(EvalReport {
        config: cfg.clone(),
        n_targets: pair.eval_targets.len(),
        systems,
        curves,
        warnings,
    })
}

type Column = (String, Box<dyn Fn(&MetricSet) -> f64>);

/// Metric columns in table order with per-target accessors.
fn columns(ks: &[usize]) -> Vec<Column> {
    let mut cols: Vec<Column> = vec![("MAP".to_owned(), Box::new(|m| m.average_precision))];
    for &k in ks {
        cols.push((format!("s@{k}"), Box::new(move |m| m.success_at[&k])));
    }
    for &k in ks {
        cols.push((format!("p@{k}"), Box::new(move |m| m.precision_at[&k])));
    }
    cols
}

fn compare(
    prev: &SystemReport,
    name: &str,
    targets: &[TargetMetrics],
    cfg: &ExperimentConfig,
) -> Result<Vec<SignificanceMark>, EvalError> {
    columns(&cfg.report_ks)
        .into_iter()
        .map(|(metric, f)| {
            let a: Vec<f64> = targets.iter().map(|t| f(&t.metrics)).collect();
            let b: Vec<f64> = prev.targets.iter().map(|t| f(&t.metrics)).collect();
            let tt = paired_t_test(&a, &b)?;
            Ok(SignificanceMark {
                system_a: name.to_owned(),
                system_b: prev.system.clone(),
                metric,
                t_statistic: tt.t_statistic,
                p_value: tt.p_value,
                degenerate: tt.degenerate,
                mark: tt.mark(SIGNIFICANCE_LEVEL),
            })
        })
        .collect()
}

fn precision_curve(
    pair: &SnapshotPair,
    lists: &BTreeMap<NodeId, &RankedList>,
    max_k: usize,
) -> Vec<CurvePoint> {
    let mut hits_at = vec![0.0; max_k];
    for t in &pair.eval_targets {
        let rel: &BTreeSet<NodeId> = &pair.relevance[t];
        let mut hits = 0usize;
        let entries = lists
            .get(t)
            .map(|l| l.entries.as_slice())
            .unwrap_or_default();
        for (i, slot) in hits_at.iter_mut().enumerate() {
            if entries.get(i).is_some_and(|e| rel.contains(&e.node)) {
                hits += 1;
            }
            *slot += hits as f64;
        }
    }
    let n = pair.eval_targets.len().max(1) as f64;
    hits_at
        .into_iter()
        .enumerate()
        .map(|(i, h)| CurvePoint {
            k: i + 1,
            value: h / ((i + 1) as f64 * n),
        })
        .collect()
}

impl EvalReport {
    pub fn system(&self, name: &str) -> Option<&SystemReport> {
        self.systems.iter().find(|s| s.system == name)
    }

    /// Per-target values of `metric` ("MAP", "s@k" or "p@k") for a system.
    pub fn per_target(&self, name: &str, metric: &str) -> Option<Vec<f64>> {
        let sys = self.system(name)?;
        let (_, f) = columns(&self.config.report_ks)
            .into_iter()
            .find(|(m, _)| m == metric)?;
        Some(sys.targets.iter().map(|t| f(&t.metrics)).collect())
    }

    /// Aligned text table with MAP and s@k columns. From the second row on,
    /// each value is followed by ▲, ▼ or ◦ for its test against the row
    /// above.
    pub fn to_table(&self) -> String {
        let mut headers = vec!["MAP".to_owned()];
        headers.extend(self.config.report_ks.iter().map(|k| format!("s@{k}")));
        let name_w = self
            .systems
            .iter()
            .map(|s| s.system.chars().count())
            .max()
            .unwrap_or(0)
            .max(6);
        let mut out = String::new();
        let _ = write!(out, "{:<name_w$}", "system");
        for h in &headers {
            let _ = write!(out, "  {h:>8}  ");
        }
        out.truncate(out.trim_end().len());
        out.push('\n');
        for s in &self.systems {
            let _ = write!(out, "{:<name_w$}", s.system);
            let mut values = vec![s.map];
            values.extend(self.config.report_ks.iter().map(|k| s.success_at[k]));
            for (h, v) in headers.iter().zip(values) {
                let mark = s
                    .significance
                    .iter()
                    .find(|m| &m.metric == h)
                    .map(|m| m.mark.symbol());
                match mark {
                    Some(sym) => {
                        let _ = write!(out, "  {v:>8.4} {sym}");
                    }
                    None => {
                        let _ = write!(out, "  {v:>8.4}  ");
                    }
                }
            }
            out.truncate(out.trim_end().len());
            out.push('\n');
        }
        let _ = writeln!(out, "({} evaluation targets)", self.n_targets);
        out
    }

    /// `k,system,value` rows of the p@k curves.
    pub fn curve_csv(&self) -> String {
        let mut out = String::from("k,system,value\n");
        for s in &self.systems {
            for p in &self.curves[&s.system] {
                let _ = writeln!(out, "{},{},{}", p.k, s.system, p.value);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::snapshot::build_snapshot_pair;
    use crate::graph::{load_edge_list, DirectedGraph};
    use crate::rank::Scored;

    fn load(s: &str) -> DirectedGraph {
        load_edge_list(s.as_bytes()).unwrap().0
    }

    struct Fixed(&'static str, Vec<u32>);

    impl Recommender for Fixed {
        fn name(&self) -> String {
            self.0.to_owned()
        }

        fn recommend(&self, target: NodeId, k: usize, _: u64) -> RankedList {
            let mut l = RankedList::empty(target, k);
            l.entries = self
                .1
                .iter()
                .filter(|&&n| n != target.0)
                .take(k)
                .enumerate()
                .map(|(i, &n)| Scored {
                    node: NodeId(n),
                    score: -(i as f64),
                })
                .collect();
            l
        }
    }

    fn pair() -> SnapshotPair {
        // a, b, c, d get ids 0..4; a and b each add one follow.
        let t1 = load("a\tb\nb\tc\nc\td\nd\ta");
        let t2 = load("a\tb\nb\tc\nc\td\nd\ta\na\tc\nb\td");
        build_snapshot_pair(t1, t2)
    }

    #[test]
    fn single_system_has_no_significance() {
        let p = pair();
        let sys = Fixed("x", vec![2, 3]);
        let cfg = ExperimentConfig {
            k: 10,
            curve_max_k: 3,
            ..Default::default()
        };
        let r = run_experiment(&p, &[&sys], &cfg).unwrap();
        assert_eq!(r.n_targets, 2);
        assert!(r.systems[0].significance.is_empty());
        // a: [c, d] with c relevant → AP 1; b: [c, d] with d relevant → AP 1/2
        assert!((r.systems[0].map - 0.75).abs() < 1e-12);
        assert_eq!(r.systems[0].success_at[&1], 0.5);
        let curve = &r.curves["x"];
        assert_eq!(curve.len(), 3);
        assert!((curve[0].value - 0.5).abs() < 1e-12);
        assert!((curve[1].value - 0.5).abs() < 1e-12);
        assert!((curve[2].value - 1.0 / 3.0).abs() < 1e-12);
        assert!(!r.to_table().contains('◦'));
    }

    #[test]
    fn adjacent_rows_are_compared() {
        let p = pair();
        let worse = Fixed("worse", vec![0, 1]);
        let better = Fixed("better", vec![2, 3]);
        let r = run_experiment(&p, &[&worse, &better], &ExperimentConfig::default()).unwrap();
        let marks = &r.systems[1].significance;
        assert_eq!(marks.len(), 1 + 2 * 3);
        assert_eq!(marks[0].metric, "MAP");
        assert_eq!(marks[0].system_b, "worse");
        let table = r.to_table();
        assert_eq!(table.lines().count(), 4);
        assert!(r.curve_csv().starts_with("k,system,value\n1,worse,"));
    }

    #[test]
    fn missing_target_is_an_error() {
        let p = pair();
        let lists = vec![RankedList::empty(p.eval_targets[0], 5)];
        let err = evaluate_rankings(&p, &[("x".into(), lists)], &ExperimentConfig::default())
            .unwrap_err();
        assert_eq!(
            err,
            EvalError::MissingTarget {
                system: "x".into(),
                target: "b".into()
            }
        );
    }

    #[test]
    fn no_systems() {
        assert_eq!(
            run_experiment(&pair(), &[], &ExperimentConfig::default()).unwrap_err(),
            EvalError::NoSystems
        );
    }
}

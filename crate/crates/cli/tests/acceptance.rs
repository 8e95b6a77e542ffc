//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;
use std::process::Command;
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use fedrec::eval::{
    attribute_clicks, average_precision, balanced_interleave_from, paired_t_test, precision_at,
    success_at, Side, Verdict,
};
use fedrec::federation::{
    FederationClient, FetchStatus, MemoryCache, PolitenessPolicy, SimulatedProvider, VirtualClock,
};
use fedrec::ppr::{power_iterate, ppr_dense_oracle, Transitions, WalkView};
use fedrec::sampler::{chi_square_uniform, mhrw_step, mhrw_walk_graph, visit_counts};
use fedrec::seed::{rng_from, Rng};
use fedrec::special::student_t_two_tailed;
use fedrec::synth::{generate, SynthConfig};
use fedrec::{
    build_snapshot_pair, run_experiment, Bm25Params, CfRecommender, DirectedGraph,
    ExperimentConfig, GraphBuilder, NodeId, PprConfig, PprRecommender, ProfileIndex,
    ProfileStrategy, RandomRecommender, Recommender,
};
use rand::Rng as _;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn graph_from_edges(n: usize, edges: &[(usize, usize)]) -> DirectedGraph {
    let mut b = GraphBuilder::new();
    for i in 0..n {
        b.intern(&format!("n{i:02}"));
    }
    for &(u, v) in edges {
        b.add_edge_ids(NodeId::from(u), NodeId::from(v));
    }
    b.build().0
}

fn random_digraph(rng: &mut Rng, n: usize, p: f64) -> DirectedGraph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if u != v && rng.random_bool(p) {
                edges.push((u, v));
            }
        }
    }
    graph_from_edges(n, &edges)
}

// ---------------------------------------------------------------------------
// 1. MHRW uniformity

/// Every `THIN`-th post-burn-in state enters the chi-square test, which
/// assumes independent draws.
const THIN: usize = 100;

fn criterion_1() -> Outcome {
    let started = Instant::now();
    let mut passes = 0;
    let mut ps = Vec::new();
    for g_idx in 0..5u64 {
        let mut rng = rng_from(1000 + g_idx);
        let n = rng.random_range(30..=50);
        // ring plus chord 0 -> 2 closes a triangle (non-bipartite) and keeps
        // the undirected view connected
        let mut edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        edges.push((0, 2));
        for u in 0..n {
            for v in 0..n {
                if u != v && rng.random_bool(0.08) {
                    edges.push((u, v));
                }
            }
        }
        let g = graph_from_edges(n, &edges);
        let order = mhrw_walk_graph(&g, NodeId(0), 200_000, &mut rng).expect("connected graph");
        let counts = visit_counts(&order, n, 0.1, THIN);
        let chi = chi_square_uniform(&counts);
        ps.push(format!("{:.3}", chi.p_value));
        if chi.p_value >= 0.01 {
            passes += 1;
        }
    }
    let secs = started.elapsed().as_secs_f64();
    outcome(
        passes >= 4 && secs < 10.0,
        format!(
            "{passes}/5 graphs uniform at alpha=0.01 (p = {}), thin {THIN}, {secs:.2}s",
            ps.join(", ")
        ),
    )
}

// ---------------------------------------------------------------------------
// 2. MHRW step law

fn acceptance_rate(deg_u: usize, deg_v: usize, proposals: usize, seed: u64) -> f64 {
    let mut rng = rng_from(seed);
    // neighbor 0 is v; the others are placeholders of degree deg_u
    let neighbors: Vec<usize> = (0..deg_u).collect();
    let (mut seen, mut accepted) = (0usize, 0usize);
    while seen < proposals {
        let step = mhrw_step(
            usize::MAX,
            &neighbors,
            |x| Some(if x == 0 { deg_v } else { deg_u }),
            &mut rng,
        )
        .unwrap();
        if step.proposed == 0 {
            seen += 1;
            accepted += usize::from(step.accepted);
        }
    }
    accepted as f64 / proposals as f64
}

fn criterion_2() -> Outcome {
    let trials = 100_000;
    let mut ok = true;
    let mut details = Vec::new();
    for (du, dv) in [(2usize, 5usize), (3, 4), (5, 2), (1, 7)] {
        let expected = (du as f64 / dv as f64).min(1.0);
        let observed = acceptance_rate(du, dv, trials, (du * 31 + dv) as u64);
        let se = (expected * (1.0 - expected) / trials as f64).sqrt();
        let good = if se == 0.0 {
            observed == expected
        } else {
            (observed - expected).abs() <= 3.0 * se
        };
        ok &= good;
        details.push(format!("({du},{dv}) {observed:.4} vs {expected:.4}"));
    }
    outcome(
        ok,
        format!("{trials} proposals each: {}", details.join("; ")),
    )
}

// ---------------------------------------------------------------------------
// 3. PPR oracle

/// Independent dense solve of `(I - λ Pᵀ) r = (1 - λ) e_s`, with dangling
/// rows of `P` pointing at the seed.
#[allow(clippy::needless_range_loop)]
fn ppr_reference(g: &DirectedGraph, seed: usize, lambda: f64) -> Vec<f64> {
    let n = g.node_count();
    let mut a = vec![vec![0.0; n + 1]; n];
    for (i, row) in a.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for u in 0..n {
        let out = g.successors(NodeId::from(u));
        if out.is_empty() {
            a[seed][u] -= lambda;
        } else {
            for v in out {
                a[v.index()][u] -= lambda / out.len() as f64;
            }
        }
    }
    a[seed][n] = 1.0 - lambda;
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, piv);
        for row in 0..n {
            if row != col {
                let f = a[row][col] / a[col][col];
                if f != 0.0 {
                    for c in col..=n {
                        a[row][c] -= f * a[col][c];
                    }
                }
            }
        }
    }
    (0..n).map(|i| a[i][n] / a[i][i]).collect()
}

#[allow(clippy::needless_range_loop)]
fn criterion_3() -> Outcome {
    let cfg = PprConfig::default();
    let mut worst_lib = 0.0f64;
    let mut worst_ref = 0.0f64;
    let mut worst_mass = 0.0f64;
    for i in 0..100u64 {
        let mut rng = rng_from(3000 + i);
        let p = rng.random_range(0.05..0.3);
        let g = random_digraph(&mut rng, 20, p);
        let seed = rng.random_range(0..20);
        let t = Transitions::new(&g, WalkView::Directed);
        let r = power_iterate(&t, NodeId::from(seed), &cfg, |_, it| {
            worst_mass = worst_mass.max((it.iter().sum::<f64>() - 1.0).abs());
        });
        let dense =
            ppr_dense_oracle(&g, NodeId::from(seed), cfg.damping, WalkView::Directed).unwrap();
        let reference = ppr_reference(&g, seed, cfg.damping);
        for j in 0..20 {
            worst_lib = worst_lib.max((r.scores[j] - dense.scores[j]).abs());
            worst_ref = worst_ref.max((r.scores[j] - reference[j]).abs());
        }
    }
    let cycle = graph_from_edges(2, &[(0, 1), (1, 0)]);
    let r = fedrec::ppr::ppr_power_iteration(&cycle, NodeId(0), &cfg).unwrap();
    let ra = 0.15 / (1.0 - 0.85 * 0.85);
    let cycle_err = (r.scores[0] - ra)
        .abs()
        .max((r.scores[1] - 0.85 * ra).abs());
    outcome(
        worst_lib < 1e-8 && worst_ref < 1e-8 && cycle_err < 1e-9 && worst_mass < 1e-9,
        format!(
            "100 graphs: max |power - dense| {worst_lib:.1e}, vs reference solve {worst_ref:.1e}; cycle r_a {:.5} err {cycle_err:.1e}; max mass drift {worst_mass:.1e}",
            r.scores[0]
        ),
    )
}

// ---------------------------------------------------------------------------
// 4. BM25 oracle

fn naive_cf(g: &DirectedGraph, strategy: ProfileStrategy, target: NodeId, k: usize) -> Vec<NodeId> {
    let (k1, b) = (1.2, 0.75);
    let profile = |u: NodeId| -> BTreeSet<NodeId> {
        let out: BTreeSet<NodeId> = g.successors(u).iter().copied().collect();
        let inc: BTreeSet<NodeId> = g.predecessors(u).iter().copied().collect();
        match strategy {
            ProfileStrategy::Following => out,
            ProfileStrategy::Followers => inc,
            ProfileStrategy::Combined => out.union(&inc).copied().collect(),
        }
    };
    let docs: Vec<(NodeId, BTreeSet<NodeId>)> = g
        .nodes()
        .map(|u| (u, profile(u)))
        .filter(|(_, p)| !p.is_empty())
        .collect();
    let n = docs.len() as f64;
    let avgdl = docs.iter().map(|(_, p)| p.len()).sum::<usize>() as f64 / n;
    let query = profile(target);
    let mut scored = Vec::new();
    for (d, terms) in &docs {
        if *d == target || g.has_edge(target, *d) {
            continue;
        }
        let dl = terms.len() as f64;
        let mut s = 0.0;
        for q in &query {
            if terms.contains(q) {
                let df = docs.iter().filter(|(_, t)| t.contains(q)).count() as f64;
                let idf = (1.0 + (n - df + 0.5) / (df + 0.5)).ln();
                s += idf * 1.0 * (k1 + 1.0) / (1.0 + k1 * (1.0 - b + b * dl / avgdl));
            }
        }
        if s > 0.0 {
            scored.push((*d, s));
        }
    }
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    scored.into_iter().take(k).map(|(d, _)| d).collect()
}

fn criterion_4() -> Outcome {
    let mut mismatches = 0;
    let mut compared = 0;
    for i in 0..200u64 {
        let mut rng = rng_from(4000 + i);
        let n = rng.random_range(3..=20);
        let p = rng.random_range(0.1..0.5);
        let g = random_digraph(&mut rng, n, p);
        let strategy = ProfileStrategy::ALL[rng.random_range(0..3)];
        let cf = CfRecommender::new(&g, strategy, Bm25Params::default());
        let k = rng.random_range(1..=n);
        for t in g.nodes() {
            if cf.index.document(t).is_none() {
                continue;
            }
            compared += 1;
            let got = cf.recommend(t, k, 0).nodes();
            if got != naive_cf(&g, strategy, t, k) {
                mismatches += 1;
            }
        }
    }
    let idx = ProfileIndex::from_documents([(NodeId(0), vec![NodeId(1)])], Bm25Params::default());
    let single = idx.bm25_score(&[NodeId(1)], NodeId(0)).unwrap();
    let hand = (4.0f64 / 3.0).ln() * 1.0;
    let err = (single - hand).abs();
    outcome(
        mismatches == 0 && err < 1e-12,
        format!("{compared} rankings over 200 indexes, {mismatches} ordering mismatches; single-doc score {single:.5} (err {err:.1e})"),
    )
}

// ---------------------------------------------------------------------------
// 5. Metric oracle

/// Reference evaluator working from the rank of each relevant item.
fn reference_metrics(recs: &[u32], rel: &BTreeSet<u32>, k: usize) -> (f64, f64, f64) {
    let mut ap = 0.0;
    for (i, r) in recs.iter().enumerate() {
        if rel.contains(r) {
            let hits_to_here = recs[..=i].iter().filter(|x| rel.contains(x)).count();
            ap += hits_to_here as f64 / (i + 1) as f64;
        }
    }
    let ap = ap / rel.len() as f64;
    let hits_k = recs.iter().take(k).filter(|x| rel.contains(x)).count();
    let p = hits_k as f64 / k as f64;
    let s = if hits_k > 0 { 1.0 } else { 0.0 };
    (ap, p, s)
}

fn criterion_5() -> Outcome {
    let mut cases = 0usize;
    let mut bad = 0usize;
    for len in 0..=8usize {
        let recs: Vec<u32> = (0..len as u32).collect();
        for mask in 0u32..(1 << len) {
            let retrieved = mask.count_ones() as usize;
            if retrieved > 4 {
                continue;
            }
            for total in retrieved.max(1)..=4 {
                let mut rel: BTreeSet<u32> =
                    (0..len as u32).filter(|i| mask & (1 << i) != 0).collect();
                rel.extend((100..).take(total - retrieved));
                let ap = average_precision(&recs, &rel).unwrap();
                for k in 1..=10 {
                    cases += 1;
                    let (rap, rp, rs) = reference_metrics(&recs, &rel, k);
                    let p = precision_at(&recs, &rel, k).unwrap();
                    let s = success_at(&recs, &rel, k).unwrap();
                    if ap != rap || p != rp || s != rs {
                        bad += 1;
                    }
                }
            }
        }
    }
    let worked = average_precision(&[1u32, 9, 2], &BTreeSet::from([1, 2])).unwrap();
    let worked_ref = 0.5 * (1.0 + 2.0 / 3.0);
    outcome(
        bad == 0 && worked == worked_ref && (worked - 5.0 / 6.0).abs() < 1e-15,
        format!("{cases} enumerated cases, {bad} disagreements; worked AP {worked:.6}"),
    )
}

// ---------------------------------------------------------------------------
// 6. t-test calibration

/// Two-tailed p by composite Simpson integration of the t density.
fn t_two_tailed_by_integration(t: f64, df: f64) -> f64 {
    let ln_c = ln_gamma_series((df + 1.0) / 2.0)
        - ln_gamma_series(df / 2.0)
        - 0.5 * (df * std::f64::consts::PI).ln();
    let pdf = |x: f64| (ln_c - (df + 1.0) / 2.0 * (1.0 + x * x / df).ln()).exp();
    let steps = 20_000;
    let h = t.abs() / steps as f64;
    let mut sum = pdf(0.0) + pdf(t.abs());
    for i in 1..steps {
        sum += pdf(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    1.0 - 2.0 * sum * h / 3.0
}

/// `ln Γ` of positive integers and half-integers by recurrence.
fn ln_gamma_series(x: f64) -> f64 {
    let (mut v, mut acc) = if (x.fract() - 0.5).abs() < 1e-12 {
        (0.5, 0.5 * std::f64::consts::PI.ln())
    } else {
        (1.0, 0.0)
    };
    while v < x - 1e-9 {
        acc += v.ln();
        v += 1.0;
    }
    acc
}

fn criterion_6() -> Outcome {
    let p = student_t_two_tailed(4.604, 4.0);
    let p_int = t_two_tailed_by_integration(4.604, 4.0);
    let d = [1.0, 2.0, 3.0, 4.0, 5.0];
    let worked = paired_t_test(&d, &[0.0; 5]).unwrap();
    let worked_int = t_two_tailed_by_integration(worked.t_statistic, 4.0);
    let mut asym_bad = 0;
    for i in 0..1000u64 {
        let mut rng = rng_from(6000 + i);
        let n = rng.random_range(2..40);
        let a: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let ab = paired_t_test(&a, &b).unwrap();
        let ba = paired_t_test(&b, &a).unwrap();
        if ab.t_statistic != -ba.t_statistic || ab.p_value != ba.p_value {
            asym_bad += 1;
        }
    }
    outcome(
        (p - 0.010).abs() < 2e-4 && (p - p_int).abs() < 1e-8 && (worked.p_value - worked_int).abs() < 1e-8 && asym_bad == 0,
        format!(
            "p(t=4.604, df=4) = {p:.6} (integration {p_int:.6}); worked p {:.5}; {asym_bad}/1000 antisymmetry violations",
            worked.p_value
        ),
    )
}

// ---------------------------------------------------------------------------
// 7. Interleaving

fn swap_verdict(v: Verdict) -> Verdict {
    match v {
        Verdict::AWins => Verdict::BWins,
        Verdict::BWins => Verdict::AWins,
        Verdict::Tie => Verdict::Tie,
    }
}

fn random_list(rng: &mut Rng) -> Vec<u32> {
    let len = rng.random_range(0..=10);
    let mut pool: Vec<u32> = (0..16).collect();
    for i in 0..len {
        let j = rng.random_range(i..pool.len());
        pool.swap(i, j);
    }
    pool.truncate(len);
    pool
}

fn criterion_7() -> Outcome {
    let (a, b) = ([1u32, 2, 3], [2u32, 3, 4]);
    let il = balanced_interleave_from(&a, &b, Side::A, None).unwrap();
    let att = attribute_clicks(&il, &a, &b, &[4]).unwrap();
    let hand = il.items == [1, 2, 3, 4] && att.k == 3 && att.verdict == Verdict::BWins;
    let mut violations = 0;
    for i in 0..1000u64 {
        let mut rng = rng_from(7000 + i);
        let a = random_list(&mut rng);
        let b = random_list(&mut rng);
        let first = if rng.random_bool(0.5) {
            Side::A
        } else {
            Side::B
        };
        let other = if first == Side::A { Side::B } else { Side::A };
        let il = balanced_interleave_from(&a, &b, first, Some(10)).unwrap();
        let il_swapped = balanced_interleave_from(&b, &a, other, Some(10)).unwrap();
        let clicks: Vec<u32> = il
            .items
            .iter()
            .copied()
            .filter(|_| rng.random_bool(0.3))
            .collect();
        let v = attribute_clicks(&il, &a, &b, &clicks).unwrap().verdict;
        let w = attribute_clicks(&il_swapped, &b, &a, &clicks)
            .unwrap()
            .verdict;
        if il.items != il_swapped.items || w != swap_verdict(v) {
            violations += 1;
        }
    }
    outcome(
        hand && violations == 0,
        format!(
            "hand trace {:?} k={} {:?}; {violations}/1000 swap-symmetry violations",
            il.items, att.k, att.verdict
        ),
    )
}

// ---------------------------------------------------------------------------
// 8. Qualitative table reproduction

/// `C(n, k)` exactly.
fn binomial(n: u64, k: u64) -> u128 {
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        c = c * u128::from(n - i) / u128::from(i + 1);
    }
    c
}

fn criterion_8() -> Outcome {
    let started = Instant::now();
    let world = generate(&SynthConfig {
        users: 1000,
        changed_users: 100,
        mean_new_follows: 6.0,
        rng_seed: 2024,
        ..Default::default()
    })
    .unwrap();
    let pair = build_snapshot_pair(world.t1, world.t2);
    let g = &pair.train;
    let random = RandomRecommender::new(g);
    let cfs: Vec<CfRecommender> = ProfileStrategy::ALL
        .iter()
        .map(|&s| CfRecommender::new(g, s, Bm25Params::default()))
        .collect();
    let ppr = PprRecommender::new(g, PprConfig::default());
    let mut systems: Vec<&dyn Recommender> = vec![&random];
    systems.extend(cfs.iter().map(|c| c as &dyn Recommender));
    systems.push(&ppr);
    let cfg = ExperimentConfig {
        master_seed: 8,
        ..Default::default()
    };
    let report = run_experiment(&pair, &systems, &cfg).unwrap();
    let base = report.per_target("random", "MAP").unwrap();
    let mut ok = true;
    let mut rows = Vec::new();
    for name in ["cf:following", "cf:followers", "cf:combined", "ppr"] {
        let ap = report.per_target(name, "MAP").unwrap();
        let t = paired_t_test(&ap, &base).unwrap();
        ok &= t.t_statistic > 0.0 && t.p_value < 0.01;
        rows.push(format!(
            "{name} MAP {:.4} p={:.1e}",
            report.system(name).unwrap().map,
            t.p_value
        ));
    }
    // expected s@10 of the random baseline, target by target
    let mut expected = 0.0;
    let mut var = 0.0;
    for &t in &pair.eval_targets {
        let pool = (g.node_count() - 1 - g.successors(t).len()) as u64;
        let rel = pair.relevance[&t]
            .iter()
            .filter(|r| r.index() < g.node_count())
            .count() as u64;
        let p = 1.0 - binomial(pool - rel, 10) as f64 / binomial(pool, 10) as f64;
        expected += p;
        var += p * (1.0 - p);
    }
    let n = pair.eval_targets.len() as f64;
    let (expected, se) = (expected / n, var.sqrt() / n);
    let observed = report.system("random").unwrap().success_at[&10];
    let within = (observed - expected).abs() <= 3.0 * se;
    let secs = started.elapsed().as_secs_f64();
    outcome(
        ok && within && pair.eval_targets.len() == 100 && secs < 60.0,
        format!(
            "{} targets; {}; random MAP {:.4}; random s@10 {observed:.3} vs expected {expected:.3} (se {se:.3}); {secs:.1}s",
            pair.eval_targets.len(),
            rows.join(", "),
            report.system("random").unwrap().map
        ),
    )
}

// ---------------------------------------------------------------------------
// 9. Politeness

/// Largest number of timestamps inside any half-open one-second window.
fn busiest_second(mut times: Vec<Duration>) -> usize {
    times.sort();
    let mut best = 0;
    let mut lo = 0;
    for hi in 0..times.len() {
        while times[hi] - times[lo] >= Duration::from_secs(1) {
            lo += 1;
        }
        best = best.max(hi - lo + 1);
    }
    best
}

fn criterion_9() -> Outcome {
    let users = 10_000;
    let world = generate(&SynthConfig {
        users,
        communities: 20,
        instances: 10,
        changed_users: 0,
        rng_seed: 9,
        ..Default::default()
    })
    .unwrap()
    .t1;
    let keys: Vec<String> = world.keys().to_vec();
    let plan = HashMap::from([
        ("inst3".to_owned(), FetchStatus::InstanceBlocked),
        ("inst7".to_owned(), FetchStatus::InstanceDown),
    ]);
    let provider = Arc::new(SimulatedProvider::new(world, plan));
    let rate = 10;
    let client = Arc::new(FederationClient::new(
        Arc::clone(&provider),
        Arc::new(MemoryCache::new()),
        Arc::new(VirtualClock::new(Duration::ZERO)),
        PolitenessPolicy {
            max_requests_per_second: rate,
            ..Default::default()
        },
    ));
    let threads = 8;
    let handles: Vec<_> = (0..threads)
        .map(|w| {
            let client = Arc::clone(&client);
            let mine: Vec<String> = keys.iter().skip(w).step_by(threads).cloned().collect();
            thread::spawn(move || mine.iter().filter(|k| client.fetch_user(k).is_ok()).count())
        })
        .collect();
    let trials: usize = handles.into_iter().map(|h| h.join().unwrap()).sum();
    let log = provider.request_log();
    let busiest = busiest_second(log.iter().map(|e| e.issued_at).collect());
    let blocked = provider.requests_to_instance("inst3");
    let down = provider.requests_to_instance("inst7");
    let c = client.counters();
    outcome(
        trials == users && busiest <= rate as usize && blocked == 0 && down == 0 && !log.is_empty(),
        format!(
            "{trials} fetches on {threads} threads, {} content requests, busiest second {busiest}/{rate}; requests to blocked instance {blocked}, to down instance {down}; {} robots-blocked records",
            log.len(),
            c.robots_blocked
        ),
    )
}

// ---------------------------------------------------------------------------
// 10. CLI reproducibility

fn fedrec(dir: &Path, args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_fedrec"))
        .args(args)
        .current_dir(dir)
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!(
            "`fedrec {}` failed: {}",
            args.join(" "),
            String::from_utf8_lossy(&out.stderr)
        ))
    }
}

fn run_pipeline(dir: &Path) -> Result<BTreeMap<String, Vec<u8>>, String> {
    std::fs::write(
        dir.join("synth.toml"),
        "users = 300\nmodel = \"planted-community\"\nseed = 5\ncommunities = 6\nchanged_users = 40\nout_dir = \"world\"\n",
    )
    .map_err(|e| e.to_string())?;
    fedrec(dir, &["synth", "--config", "synth.toml"])?;
    fedrec(
        dir,
        &[
            "synth",
            "--users",
            "120",
            "--model",
            "preferential-attachment",
            "--seed",
            "3",
            "--out-dir",
            "pa",
        ],
    )?;
    let start = std::fs::read_to_string(dir.join("world/t1.tsv")).map_err(|e| e.to_string())?;
    let start = start
        .lines()
        .next()
        .and_then(|l| l.split('\t').next())
        .unwrap_or_default()
        .to_owned();
    fedrec(
        dir,
        &[
            "sample",
            "--world",
            "world/t2.tsv",
            "--start",
            &start,
            "--iterations",
            "400",
            "--seed",
            "1",
            "--fail",
            "inst2=instance_blocked",
            "--out-dir",
            "mhrw",
        ],
    )?;
    fedrec(
        dir,
        &[
            "sample",
            "--world",
            "world/t2.tsv",
            "--start",
            &start,
            "--algorithm",
            "ego",
            "--iterations",
            "200",
            "--seed",
            "2",
            "--out-dir",
            "ego",
        ],
    )?;
    fedrec(
        dir,
        &[
            "stats",
            "--graph",
            "mhrw/sample.tsv",
            "--visited",
            "mhrw/sample_manifest.json",
            "--out",
            "stats.txt",
        ],
    )?;
    fedrec(
        dir,
        &[
            "recommend",
            "--graph",
            "world/t1.tsv",
            "--system",
            "cf:combined",
            "--k",
            "20",
            "--seed",
            "4",
            "--out",
            "cf.jsonl",
        ],
    )?;
    fedrec(
        dir,
        &[
            "recommend",
            "--graph",
            "world/t1.tsv",
            "--system",
            "ppr",
            "--damping",
            "0.5",
            "--k",
            "20",
            "--out",
            "ppr.jsonl",
        ],
    )?;
    fedrec(
        dir,
        &[
            "recommend",
            "--graph",
            "world/t1.tsv",
            "--system",
            "random",
            "--k",
            "20",
            "--seed",
            "4",
            "--out",
            "random.jsonl",
        ],
    )?;
    fedrec(
        dir,
        &[
            "evaluate",
            "--train",
            "world/t1.tsv",
            "--truth",
            "world/t2.tsv",
            "--seed",
            "6",
            "--out-dir",
            "eval",
        ],
    )?;
    fedrec(
        dir,
        &[
            "evaluate",
            "--train",
            "world/t1.tsv",
            "--truth",
            "world/t2.tsv",
            "--rankings",
            "random.jsonl",
            "--rankings",
            "cf.jsonl",
            "--k",
            "20",
            "--curve-max-k",
            "20",
            "--out-dir",
            "eval_files",
        ],
    )?;
    fedrec(
        dir,
        &[
            "report",
            "--curve",
            "eval/curve.csv",
            "--out",
            "eval/precision.svg",
        ],
    )?;
    let target = start.as_str();
    fedrec(
        dir,
        &[
            "interleave",
            "--a",
            "cf.jsonl",
            "--b",
            "ppr.jsonl",
            "--target",
            target,
            "--seed",
            "3",
            "--out",
            "verdict.json",
        ],
    )?;
    let mut files = BTreeMap::new();
    collect(dir, dir, &mut files)?;
    Ok(files)
}

fn collect(root: &Path, dir: &Path, out: &mut BTreeMap<String, Vec<u8>>) -> Result<(), String> {
    for entry in std::fs::read_dir(dir).map_err(|e| e.to_string())? {
        let path = entry.map_err(|e| e.to_string())?.path();
        if path.is_dir() {
            collect(root, &path, out)?;
        } else {
            let rel = path.strip_prefix(root).unwrap().display().to_string();
            out.insert(rel, std::fs::read(&path).map_err(|e| e.to_string())?);
        }
    }
    Ok(())
}

fn criterion_10() -> Outcome {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let (ra, rb) = match (run_pipeline(a.path()), run_pipeline(b.path())) {
        (Ok(x), Ok(y)) => (x, y),
        (Err(e), _) | (_, Err(e)) => return outcome(false, e),
    };
    let differing: Vec<&String> = ra.keys().filter(|k| rb.get(*k) != ra.get(*k)).collect();
    outcome(
        ra.len() == rb.len() && differing.is_empty() && ra.len() >= 15,
        format!(
            "{} output files from 7 commands compared, differing: {:?}",
            ra.len(),
            differing
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("MHRW uniformity", criterion_1),
        ("MHRW step law", criterion_2),
        ("PPR oracle", criterion_3),
        ("BM25 oracle", criterion_4),
        ("metric oracle", criterion_5),
        ("t-test calibration", criterion_6),
        ("interleaving", criterion_7),
        ("qualitative table reproduction", criterion_8),
        ("politeness", criterion_9),
        ("CLI reproducibility", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {:<32} {}  {}",
            i + 1,
            name,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}

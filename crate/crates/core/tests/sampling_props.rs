mod common;

use std::collections::HashMap;
use std::sync::Arc;
use std::thread;
use std::time::Duration;

use common::edges;
use fedrec::federation::{
    FederationClient, FetchStatus, MemoryCache, PolitenessPolicy, SimulatedProvider, VirtualClock,
};
use fedrec::sampler::{acceptance_probability, mhrw_sample, WalkConfig};
use fedrec::{GraphBuilder, NodeId};
use proptest::prelude::*;

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

/// World whose node `i` lives on instance `inst{i % instances}`.
fn world(n: usize, e: &[(usize, usize)], instances: usize) -> fedrec::DirectedGraph {
    let key = |i: usize| format!("u{i}@inst{}", i % instances);
    let mut b = GraphBuilder::new();
    for i in 0..n {
        b.intern(&key(i));
    }
    for &(u, v) in e {
        b.add_edge_ids(NodeId::from(u), NodeId::from(v));
    }
    b.build().0
}

proptest! {
    #[test]
    fn metropolis_hastings_detailed_balance(du in 1usize..200, dv in 1usize..200) {
        // uniform target: P(u -> v) = P(v -> u)
        let forward = acceptance_probability(du, dv) / du as f64;
        let backward = acceptance_probability(dv, du) / dv as f64;
        prop_assert!((forward - backward).abs() <= 1e-15 * forward.max(backward));
        prop_assert!((0.0..=1.0).contains(&acceptance_probability(du, dv)));
    }

    #[test]
    fn uniform_is_stationary_for_the_walk((n, e) in edges(15, 60)) {
        // transition matrix assembled from the acceptance rule on the
        // undirected view; uniform mass must be preserved exactly
        let g = common::graph(n, &e);
        let adj = g.undirected_adjacency();
        let mut inflow = vec![0.0; n];
        for u in 0..n {
            let du = adj[u].len();
            let mut stay = 1.0;
            for v in &adj[u] {
                let p = acceptance_probability(du, adj[v.index()].len()) / du as f64;
                inflow[v.index()] += p / n as f64;
                stay -= p;
            }
            inflow[u] += stay / n as f64;
        }
        for x in inflow {
            prop_assert!((x - 1.0 / n as f64).abs() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn rate_limit_holds_under_concurrency(
        (n, e) in edges(80, 300),
        rate in 1u32..15,
        threads in 1usize..8,
        instances in 2usize..5,
    ) {
        let g = world(n, &e, instances);
        let keys: Vec<String> = g.keys().to_vec();
        let plan = HashMap::from([("inst1".to_owned(), FetchStatus::InstanceBlocked)]);
        let provider = Arc::new(SimulatedProvider::new(g, plan));
        let client = Arc::new(FederationClient::new(
            Arc::clone(&provider),
            Arc::new(MemoryCache::new()),
            Arc::new(VirtualClock::new(Duration::from_millis(250))),
            PolitenessPolicy { max_requests_per_second: rate, ..Default::default() },
        ));
        let handles: Vec<_> = (0..threads)
            .map(|t| {
                let client = Arc::clone(&client);
                // overlapping key ranges exercise the cache under contention
                let mine: Vec<String> = keys.iter().cycle().skip(t * 3).take(keys.len()).cloned().collect();
                thread::spawn(move || {
                    for k in mine {
                        client.fetch_user(&k).unwrap();
                    }
                })
            })
            .collect();
        for h in handles {
            h.join().unwrap();
        }
        let log = provider.request_log();
        prop_assert!(busiest_second(log.iter().map(|l| l.issued_at).collect()) <= rate as usize);
        prop_assert_eq!(provider.requests_to_instance("inst1"), 0);
        // each allowed user costs exactly two content requests, once
        let allowed = keys.iter().filter(|k| !k.ends_with("@inst1")).count();
        prop_assert_eq!(log.len(), 2 * allowed);
    }

    #[test]
    fn mhrw_sample_only_visits_fetched_users((n, e) in edges(40, 160), seed in any::<u64>()) {
        let g = world(n, &e, 3);
        let start = g.key(NodeId(0)).to_owned();
        let provider = Arc::new(SimulatedProvider::new(g, HashMap::from([("inst2".to_owned(), FetchStatus::InstanceDown)])));
        let client = FederationClient::new(
            Arc::clone(&provider),
            Arc::new(MemoryCache::new()),
            Arc::new(VirtualClock::new(Duration::ZERO)),
            PolitenessPolicy::default(),
        );
        let cfg = WalkConfig { iterations: 300, rng_seed: seed, ..Default::default() };
        let r = mhrw_sample(&start, &cfg, &client).unwrap();
        prop_assert_eq!(r.visited_order.len(), 300);
        for u in &r.unique_visited {
            let key = r.subgraph.key(*u);
            prop_assert!(!key.ends_with("@inst2"));
            prop_assert!(r.subgraph.is_visited(*u));
        }
        // every user is fetched from the provider at most once
        prop_assert!(provider.user_fetches() <= n);
        prop_assert_eq!(provider.requests_to_instance("inst2"), 0);
    }
}

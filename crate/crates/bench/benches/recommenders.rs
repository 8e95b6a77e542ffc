use std::collections::BTreeSet;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use fedrec::eval::{average_precision, precision_at};
use fedrec::ppr::ppr_power_iteration;
use fedrec::sampler::mhrw_walk_graph;
use fedrec::seed::rng_from;
use fedrec::synth::{generate, SynthConfig};
use fedrec::{
    Bm25Params, CfRecommender, DirectedGraph, NodeId, PprConfig, ProfileStrategy, Recommender,
};

fn world(users: usize) -> DirectedGraph {
    let cfg = SynthConfig {
        users,
        changed_users: users / 10,
        rng_seed: 7,
        ..SynthConfig::default()
    };
    generate(&cfg).unwrap().t1
}

fn ppr(c: &mut Criterion) {
    let g = world(5_000);
    let cfg = PprConfig::default();
    c.bench_function("ppr/5k", |b| {
        b.iter(|| ppr_power_iteration(&g, black_box(NodeId(3)), &cfg).unwrap())
    });
}

fn cf(c: &mut Criterion) {
    let g = world(5_000);
    let mut group = c.benchmark_group("cf");
    group.bench_function("index/combined", |b| {
        b.iter(|| CfRecommender::new(&g, ProfileStrategy::Combined, Bm25Params::default()))
    });
    for strategy in [
        ProfileStrategy::Following,
        ProfileStrategy::Followers,
        ProfileStrategy::Combined,
    ] {
        let rec = CfRecommender::new(&g, strategy, Bm25Params::default());
        group.bench_function(format!("recommend/{}", strategy.name()), |b| {
            b.iter(|| rec.recommend(black_box(NodeId(3)), 100, 1))
        });
    }
    group.finish();
}

fn mhrw(c: &mut Criterion) {
    let g = world(5_000);
    c.bench_function("mhrw/10k_steps", |b| {
        b.iter_batched(
            || rng_from(11),
            |mut rng| mhrw_walk_graph(&g, NodeId(0), 10_000, &mut rng).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

fn metrics(c: &mut Criterion) {
    let recs: Vec<u32> = (0..100).collect();
    let relevant: BTreeSet<u32> = (0..1_000).step_by(7).collect();
    c.bench_function("metrics/ap_p10", |b| {
        b.iter(|| {
            let ap = average_precision(black_box(&recs), &relevant).unwrap();
            ap + precision_at(black_box(&recs), &relevant, 10).unwrap()
        })
    });
}

criterion_group!(benches, ppr, cf, mhrw, metrics);
criterion_main!(benches);

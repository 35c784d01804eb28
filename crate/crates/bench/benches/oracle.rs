use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use lgt_bench::{companion, random_connected};
use lgt_core::multigraph::Orientation;
use lgt_core::oracle::{decide_k, opt_search, OracleQuery};

fn bench_oracle(c: &mut Criterion) {
    let mut group = c.benchmark_group("opt_search");
    group.sample_size(20);
    for nodes in [3u32, 4] {
        let gs = random_connected(41 + u64::from(nodes), Orientation::Undirected, nodes, 2, 2);
        let gt = companion(43 + u64::from(nodes), &gs, 2, 2);
        group.bench_with_input(BenchmarkId::from_parameter(nodes), &nodes, |b, _| {
            b.iter(|| {
                let q = OracleQuery::new(black_box(gs.clone()), black_box(gt.clone()), 6).unwrap();
                opt_search(&q).unwrap()
            });
        });
    }
    group.finish();

    let mut group = c.benchmark_group("decide_k");
    group.sample_size(20);
    for nodes in [3u32, 4] {
        let gs = random_connected(41 + u64::from(nodes), Orientation::Undirected, nodes, 2, 2);
        let gt = companion(43 + u64::from(nodes), &gs, 2, 2);
        group.bench_with_input(BenchmarkId::from_parameter(nodes), &nodes, |b, _| {
            b.iter(|| {
                let q = OracleQuery::new(black_box(gs.clone()), black_box(gt.clone()), 6).unwrap();
                decide_k(&q, 4).unwrap()
            });
        });
    }
    group.finish();
}

criterion_group!(benches, bench_oracle);
criterion_main!(benches);

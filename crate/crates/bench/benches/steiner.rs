use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use lgt_bench::{random_connected, random_pairs};
use lgt_core::multigraph::Orientation;
use lgt_core::steiner::steiner_forest_apx;

fn bench_steiner(c: &mut Criterion) {
    let mut group = c.benchmark_group("steiner_forest_apx");
    for (nodes, pairs) in [(32u32, 4u32), (64, 8), (128, 12)] {
        let g = random_connected(
            23 + u64::from(nodes),
            Orientation::Undirected,
            nodes,
            2 * nodes,
            1,
        );
        let s = random_pairs(29 + u64::from(nodes), nodes, pairs);
        let label = format!("{nodes}n_{pairs}p");
        group.bench_with_input(BenchmarkId::from_parameter(label), &nodes, |b, _| {
            b.iter(|| steiner_forest_apx(black_box(&g), black_box(&s)).unwrap());
        });
    }
    group.finish();
}

criterion_group!(benches, bench_steiner);
criterion_main!(benches);

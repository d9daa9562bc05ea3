use criterion::{black_box, criterion_group, criterion_main, Criterion};
use pancake_core::cayley::{bfs_metrics, girth_and_cycles, CubicPancakeGraph, DEFAULT_GIRTH_CAP};
use pancake_core::classifier::{classify, Triple};
use pancake_core::grouptest::group_order;

fn triple(n: usize, m: usize, k: usize) -> Triple {
    Triple::new(n, m, k).unwrap()
}

fn oracle(c: &mut Criterion) {
    let t = triple(40, 39, 7);
    c.bench_function("group_order (40,39,7)", |b| {
        b.iter(|| group_order(black_box(&t.generators())).unwrap())
    });
    let t = triple(60, 57, 2);
    c.bench_function("group_order (60,57,2)", |b| {
        b.iter(|| group_order(black_box(&t.generators())).unwrap())
    });
}

fn classifier(c: &mut Criterion) {
    c.bench_function("classify all n=30", |b| {
        b.iter(|| {
            Triple::all_of_degree(30)
                .filter(|&t| classify(t).decision() == Some(true))
                .count()
        })
    });
}

fn graphs(c: &mut Criterion) {
    let mut group = c.benchmark_group("graphs");
    group.sample_size(10);
    let g = CubicPancakeGraph::new(triple(8, 6, 5));
    group.bench_function("bfs (8,6,5)", |b| {
        b.iter(|| bfs_metrics(black_box(&g)).unwrap())
    });
    let g = CubicPancakeGraph::new(triple(7, 6, 4));
    group.bench_function("girth (7,6,4)", |b| {
        b.iter(|| girth_and_cycles(black_box(&g), DEFAULT_GIRTH_CAP).unwrap())
    });
    group.finish();
}

criterion_group!(benches, oracle, classifier, graphs);
criterion_main!(benches);

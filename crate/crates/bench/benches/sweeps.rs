//! Whole-subsystem benchmarks: the exhaustive wiring search and the
//! section classification grid.

use criterion::{black_box, criterion_group, criterion_main, BatchSize, Criterion};
use nsbox_core::analysis::{optimal_two_copy_search, region_classify};
use nsbox_core::{Epsilon, NsBox};

fn bench_search(c: &mut Criterion) {
    let b = NsBox::correlated(Epsilon::new(0.5).unwrap());
    let mut group = c.benchmark_group("search");
    group.sample_size(20);
    group.bench_function("exhaustive same-order (0.5e9 pairs)", |bench| {
        bench.iter_batched(
            || b,
            |bx| optimal_two_copy_search(black_box(&bx), false).unwrap(),
            BatchSize::LargeInput,
        )
    });
    group.bench_function("exhaustive full (1.1e9 pairs)", |bench| {
        bench.iter_batched(
            || b,
            |bx| optimal_two_copy_search(black_box(&bx), true).unwrap(),
            BatchSize::LargeInput,
        )
    });
    group.finish();
}

fn bench_region(c: &mut Criterion) {
    let mut group = c.benchmark_group("region");
    group.sample_size(10);
    group.bench_function("classify 101x101", |bench| {
        bench.iter(|| region_classify(black_box(101), black_box(200)))
    });
    group.finish();
}

criterion_group!(benches, bench_search, bench_region);
criterion_main!(benches);

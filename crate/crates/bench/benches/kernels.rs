//! Hot-path microbenchmarks: composition, depolarization, map iteration.

use criterion::{black_box, criterion_group, criterion_main, Criterion};
use nsbox_core::dynamics::{iterate_eps, StopRule};
use nsbox_core::{compose, Epsilon, NsBox, PlaneCoords, ProtocolWiring};

fn bench_compose(c: &mut Criterion) {
    let b = NsBox::correlated(Epsilon::new(0.5).unwrap());
    let same = ProtocolWiring::distillation();
    let crossed = ProtocolWiring::from_ids(13_124, 13_157).unwrap();
    c.bench_function("compose same order", |bench| {
        bench.iter(|| compose(black_box(&b), black_box(&b), black_box(&same)).unwrap())
    });
    c.bench_function("compose crossed order", |bench| {
        bench.iter(|| compose(black_box(&b), black_box(&b), black_box(&crossed)).unwrap())
    });
}

fn bench_depolarize(c: &mut Criterion) {
    let b = NsBox::from_plane(PlaneCoords::new(0.52, 0.17)).unwrap();
    c.bench_function("depolarize", |bench| {
        bench.iter(|| black_box(&b).depolarize().unwrap())
    });
}

fn bench_iterate(c: &mut Criterion) {
    let start = Epsilon::new(0.01).unwrap();
    c.bench_function("iterate eps to convergence", |bench| {
        bench.iter(|| iterate_eps(black_box(start), &StopRule::converge(1e-12)))
    });
}

criterion_group!(benches, bench_compose, bench_depolarize, bench_iterate);
criterion_main!(benches);

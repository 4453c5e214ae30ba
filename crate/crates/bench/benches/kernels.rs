use std::hint::black_box;

use chslab_bench::moment_pair;
use chslab_core::numkit::{eigvalsh, partial_transpose, trace_distance};
use chslab_core::typespace::{haar_moment, type_mixture};
use chslab_core::Limits;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn moments(c: &mut Criterion) {
    let limits = Limits::default();
    let mut group = c.benchmark_group("haar_moment");
    for (d, t) in [(2, 4), (4, 3), (8, 2)] {
        group.bench_with_input(
            BenchmarkId::new("projector", format!("d{d}t{t}")),
            &(d, t),
            |b, &(d, t)| b.iter(|| haar_moment(black_box(d), t, &limits).unwrap()),
        );
        group.bench_with_input(
            BenchmarkId::new("type_mixture", format!("d{d}t{t}")),
            &(d, t),
            |b, &(d, t)| b.iter(|| type_mixture(black_box(d), t, &limits).unwrap()),
        );
    }
    group.finish();
}

fn spectral(c: &mut Criterion) {
    let (joint, product) = moment_pair(6, 2).unwrap();
    c.bench_function("eigvalsh_1296", |b| {
        b.iter(|| eigvalsh(black_box(&joint)).unwrap())
    });
    c.bench_function("trace_distance_1296", |b| {
        b.iter(|| trace_distance(black_box(&joint), black_box(&product)).unwrap())
    });
    c.bench_function("partial_transpose_1296", |b| {
        b.iter(|| partial_transpose(black_box(&joint), &[2, 3]).unwrap())
    });
}

criterion_group! {
    name = kernels;
    config = Criterion::default().sample_size(10);
    targets = moments, spectral
}
criterion_main!(kernels);

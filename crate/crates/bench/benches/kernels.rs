use criterion::{black_box, criterion_group, criterion_main, Criterion};
use sharp_radon_core::extremal::{search_extremizer, SearchConfig};
use sharp_radon_core::multilinear::drury_form;
use sharp_radon_core::transforms::{radon_norm, rsharp, sample_grid};
use sharp_radon_core::{Dimension, Field, QuadSettings, TransformConfig};

fn radon_norm_closed(c: &mut Criterion) {
    let f = Field::random_smooth(Dimension::TWO, 1, 5);
    let cfg = TransformConfig::with_quad(QuadSettings::with_tol(1e-8));
    c.bench_function("radon_norm d=2 random_smooth", |b| {
        b.iter(|| radon_norm(black_box(&f), 3.0, &cfg).unwrap())
    });
}

fn rsharp_grid(c: &mut Criterion) {
    let f = sample_grid(&Field::gaussian(Dimension::TWO, 1.0, 1.0), 32, 4.0, false).unwrap();
    let cfg = TransformConfig::default();
    c.bench_function("rsharp 32^2 grid", |b| b.iter(|| rsharp(black_box(&f), &cfg)));
}

fn drury_small(c: &mut Criterion) {
    let f = Field::extremizer(Dimension::TWO, 1.0, 1.0);
    let fields = vec![f; 3];
    c.bench_function("drury_form 1e4 samples", |b| {
        b.iter(|| drury_form(black_box(&fields), 10_000, 1).unwrap())
    });
}

fn radial_search_step(c: &mut Criterion) {
    let start = Field::gaussian(Dimension::TWO, 1.0, 1.0);
    let cfg = SearchConfig::default();
    c.bench_function("radial search, one step", |b| {
        b.iter(|| search_extremizer(black_box(&start), 1, &cfg).unwrap())
    });
}

criterion_group! {
    name = kernels;
    config = Criterion::default().sample_size(10);
    targets = radon_norm_closed, rsharp_grid, drury_small, radial_search_step
}
criterion_main!(kernels);

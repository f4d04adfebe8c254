use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use ehcr_core::{optimize_s1, optimize_sf1, stability_region, Preset, SolverOptions};

fn single_point(c: &mut Criterion) {
    let probs = Preset::Fig3.probs();
    let traffic = Preset::Fig3.traffic();
    let opts = SolverOptions::default();
    c.bench_function("optimize_s1", |b| {
        b.iter(|| optimize_s1(&probs, &traffic, black_box(0.3), &opts))
    });
    c.bench_function("optimize_sf1", |b| {
        b.iter(|| optimize_sf1(&probs, &traffic, black_box(0.3), &opts))
    });
}

fn region(c: &mut Criterion) {
    let probs = Preset::Fig4.probs();
    let traffic = Preset::Fig4.traffic();
    let opts = SolverOptions::default();
    let grid: Vec<f64> = (0..35).map(|k| 0.02 * k as f64).collect();
    let mut group = c.benchmark_group("region");
    group.sample_size(10);
    group.bench_function("no_feedback", |b| {
        b.iter(|| stability_region(&probs, &traffic, black_box(&grid), false, &opts))
    });
    group.bench_function("feedback", |b| {
        b.iter(|| stability_region(&probs, &traffic, black_box(&grid), true, &opts))
    });
    group.finish();
}

criterion_group!(benches, single_point, region);
criterion_main!(benches);

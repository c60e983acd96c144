use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use nanospin::exact_dynamics::linspace;
use nanospin::noise::NoiseAverage;
use nanospin::{monte_carlo, p1_noise_gaussian_approx, NoiseModel};

fn analytic(c: &mut Criterion) {
    let model = NoiseModel::exponential(1.0, 1e-4, 50.0).unwrap();
    let average = NoiseAverage::new(134, &model).unwrap();
    c.bench_function("noise_analytic_n134", |b| b.iter(|| average.p1(black_box(63.0)).unwrap()));
    c.bench_function("noise_gaussian_approx_n10000", |b| {
        b.iter(|| p1_noise_gaussian_approx(10_000, black_box(63.0), &model).unwrap())
    });
}

fn sampled(c: &mut Criterion) {
    let model = NoiseModel::exponential(1.0, 1e-4, 50.0).unwrap();
    let grid = linspace(0.0, 20.0, 401);
    let mut group = c.benchmark_group("monte_carlo");
    group.sample_size(10);
    group.bench_function("n134_401pts_256real", |b| b.iter(|| monte_carlo(134, &grid, &model, 256, 1).unwrap()));
    group.finish();
}

criterion_group!(benches, analytic, sampled);
criterion_main!(benches);

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nanospin::oracle::oracle_p1_tau;
use nanospin::spectral_cg::p1_via_cg;
use nanospin::{trace, ClusterSpec, ExactPolarization, TimeGrid};

fn closed_form(c: &mut Criterion) {
    let mut group = c.benchmark_group("closed_form_setup");
    for n in [10, 60, 1_000, 10_000] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| b.iter(|| ExactPolarization::new(n).unwrap()));
    }
    group.finish();

    let mut group = c.benchmark_group("closed_form_eval");
    for n in [10, 1_000, 10_000] {
        let exact = ExactPolarization::new(n).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &exact, |b, e| b.iter(|| e.p1(black_box(0.37))));
    }
    group.finish();
}

fn traces(c: &mut Criterion) {
    let cluster = ClusterSpec::new(1_001, 1.0).unwrap();
    let grid = TimeGrid::linspace_tau(0.0, std::f64::consts::TAU, 2_001);
    c.bench_function("trace_n1001_2001pts", |b| b.iter(|| trace(&cluster, &grid).unwrap()));
}

fn cross_checks(c: &mut Criterion) {
    let taus: Vec<f64> = (0..200).map(|i| i as f64 * 0.0314).collect();
    let mut group = c.benchmark_group("cross_check_200pts");
    group.sample_size(10);
    for n in [6, 10] {
        group.bench_with_input(BenchmarkId::new("oracle", n), &n, |b, &n| b.iter(|| oracle_p1_tau(n, &taus).unwrap()));
        group.bench_with_input(BenchmarkId::new("angular_momentum", n), &n, |b, &n| {
            b.iter(|| taus.iter().map(|&t| p1_via_cg(n, t).unwrap()).sum::<f64>())
        });
    }
    group.finish();
}

criterion_group!(benches, closed_form, traces, cross_checks);
criterion_main!(benches);

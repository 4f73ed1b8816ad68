use std::hint::black_box;

use coopcache_bench::{desk_params, paper_params, zipf};
use coopcache_core::lambert::lambert_w0;
use coopcache_core::optimizer::{optimal_allocation, DEFAULT_TOL};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn lambert(c: &mut Criterion) {
    let xs: Vec<f64> = (0..1000).map(|i| 10f64.powf(-6.0 + 12.0 * i as f64 / 999.0)).collect();
    c.bench_function("lambert_w0/1000 log-spaced", |b| {
        b.iter(|| xs.iter().map(|&x| lambert_w0(black_box(x)).unwrap()).sum::<f64>())
    });
}

fn optimizer(c: &mut Criterion) {
    let mut group = c.benchmark_group("optimal_allocation");
    for (name, params) in [("desk", desk_params(5.0)), ("paper", paper_params(5.0))] {
        let dist = zipf(&params);
        group.bench_with_input(BenchmarkId::from_parameter(name), &params, |b, p| {
            b.iter(|| optimal_allocation(&dist, black_box(p), DEFAULT_TOL).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, lambert, optimizer);
criterion_main!(benches);

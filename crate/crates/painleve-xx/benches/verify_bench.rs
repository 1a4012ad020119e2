//! Compares the rayon-parallel suite runner against the sequential path,
//! and the batch transform sampling in both modes.

use criterion::{criterion_group, criterion_main, Criterion};

use painleve_xx::integrator::ToleranceConfig;
use painleve_xx::par::Parallelism;
use painleve_xx::transforms::square_trajectory_with;
use painleve_xx::verify::{pii0_central_fixture, run_suite_with};

fn bench_suite(c: &mut Criterion) {
    let tol = ToleranceConfig::default();
    let mut group = c.benchmark_group("run_suite_all");
    group.sample_size(10);
    group.bench_function("parallel", |b| {
        b.iter(|| run_suite_with("all", &tol, Parallelism::Auto).unwrap())
    });
    group.bench_function("sequential", |b| {
        b.iter(|| run_suite_with("all", &tol, Parallelism::Sequential).unwrap())
    });
    group.finish();
}

fn bench_square_sampling(c: &mut Criterion) {
    let tol = ToleranceConfig::default();
    let traj = pii0_central_fixture(&tol).unwrap();
    let mut group = c.benchmark_group("square_trajectory_100k");
    group.bench_function("parallel", |b| {
        b.iter(|| square_trajectory_with(&traj, 100_000, Parallelism::Auto).unwrap())
    });
    group.bench_function("sequential", |b| {
        b.iter(|| square_trajectory_with(&traj, 100_000, Parallelism::Sequential).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_suite, bench_square_sampling);
criterion_main!(benches);

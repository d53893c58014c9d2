use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use resilient_cluster::approx::{gonzalez, hochbaum_shmoys};
use resilient_cluster::lp::certify;
use resilient_cluster::mstdp::solve_outlier_clustering;
use resilient_cluster::oracle::brute_force;
use resilient_cluster::{Formulation, Objective};
use resilient_cluster_bench::{asymmetric, outlier, symmetric};

fn lp_certify(c: &mut Criterion) {
    let mut group = c.benchmark_group("certify");
    group.sample_size(10);
    for n in [12, 24, 48] {
        let fx = symmetric(n, 3);
        group.bench_with_input(BenchmarkId::new("kc-exact", &fx.name), &fx, |b, fx| {
            b.iter(|| certify(black_box(&fx.exact), Formulation::Kc).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("kc-float", &fx.name), &fx, |b, fx| {
            b.iter(|| certify(black_box(&fx.float), Formulation::Kc).unwrap())
        });
    }
    let fx = asymmetric(24, 3);
    group.bench_with_input(BenchmarkId::new("asym-kc-exact", &fx.name), &fx, |b, fx| {
        b.iter(|| certify(black_box(&fx.exact), Formulation::AsymKc).unwrap())
    });
    let fx = outlier(24, 3, 3);
    group.bench_with_input(BenchmarkId::new("kco-exact", &fx.name), &fx, |b, fx| {
        b.iter(|| certify(black_box(&fx.exact), Formulation::Kco).unwrap())
    });
    group.finish();
}

fn approximations(c: &mut Criterion) {
    let mut group = c.benchmark_group("approx");
    for n in [64, 256] {
        let fx = symmetric(n, 4);
        group.bench_with_input(BenchmarkId::new("gonzalez", &fx.name), &fx, |b, fx| {
            b.iter(|| gonzalez(black_box(&fx.float)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("hs", &fx.name), &fx, |b, fx| {
            b.iter(|| hochbaum_shmoys(black_box(&fx.float)).unwrap())
        });
    }
    group.finish();
}

fn tree_dp(c: &mut Criterion) {
    let mut group = c.benchmark_group("mstdp");
    group.sample_size(10);
    for (n, z) in [(16, 2), (32, 4)] {
        let fx = outlier(n, 3, z);
        group.bench_with_input(BenchmarkId::new("kmedian-float", &fx.name), &fx, |b, fx| {
            b.iter(|| solve_outlier_clustering(black_box(&fx.float), Objective::KMedian).unwrap())
        });
    }
    group.finish();
}

fn oracle(c: &mut Criterion) {
    let mut group = c.benchmark_group("oracle");
    group.sample_size(10);
    let fx = outlier(12, 3, 2);
    group.bench_with_input(BenchmarkId::new("kmedian-exact", &fx.name), &fx, |b, fx| {
        b.iter(|| brute_force(black_box(&fx.exact), Objective::KMedian).unwrap())
    });
    group.finish();
}

criterion_group!(benches, lp_certify, approximations, tree_dp, oracle);
criterion_main!(benches);

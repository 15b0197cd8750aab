//! Ising reference values: closed form vs transfer-free brute force.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use tn_core::statmech::{
    critical_coupling, ising_bruteforce, kaufman_ln_partition, second_moment_exact, IsingSpec,
    MomentParams,
};

fn bench_kaufman(c: &mut Criterion) {
    let mut group = c.benchmark_group("kaufman");
    for l in [8usize, 64, 512] {
        group.bench_with_input(BenchmarkId::new("ln-partition", l), &l, |b, &l| {
            b.iter(|| kaufman_ln_partition(black_box(l), l, critical_coupling()).unwrap())
        });
    }
    group.finish();
}

fn bench_bruteforce(c: &mut Criterion) {
    let mut group = c.benchmark_group("bruteforce");
    group.sample_size(20);
    for (l1, l2) in [(3usize, 4usize), (4, 4), (4, 5)] {
        let spec = IsingSpec {
            l1,
            l2,
            beta_j: critical_coupling(),
            beta_h: 0.05,
        };
        let label = format!("{l1}x{l2}");
        group.bench_with_input(BenchmarkId::new("gray-code-sum", &label), &spec, |b, s| {
            b.iter(|| ising_bruteforce(black_box(s)).unwrap())
        });
    }
    group.finish();
}

fn bench_second_moment(c: &mut Criterion) {
    let mut group = c.benchmark_group("second-moment");
    group.sample_size(20);
    let params = MomentParams {
        l1: 2,
        l2: 2,
        bond_dim: 3,
        z: num_complex::Complex64::new(0.5, 0.0),
    };
    group.bench_function("exact-2x2-d3", |b| {
        b.iter(|| second_moment_exact(black_box(&params)).unwrap())
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_kaufman,
    bench_bruteforce,
    bench_second_moment
);
criterion_main!(benches);

//! Exact contraction: swallowing vs full labeling enumeration, and the
//! planning/bound machinery around it.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use tn_bench::gaussian_torus;
use tn_core::network::contract_reference;
use tn_core::positive_mc::{mc_estimate, plan_trials};
use tn_core::swallow::{delta_norms, greedy_order, plan_swallowing, swallow_contract};

fn bench_swallow_vs_reference(c: &mut Criterion) {
    let mut group = c.benchmark_group("exact-contraction");
    for (l1, l2, d) in [(2usize, 2usize, 2usize), (2, 3, 2), (2, 4, 2), (2, 3, 3)] {
        let tn = gaussian_torus(l1, l2, d, 17);
        let plan = plan_swallowing(&tn, &greedy_order(&tn)).unwrap();
        let label = format!("{l1}x{l2}-d{d}");
        group.bench_with_input(BenchmarkId::new("swallow", &label), &tn, |b, tn| {
            b.iter(|| swallow_contract(black_box(tn), &plan).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("reference", &label), &tn, |b, tn| {
            b.iter(|| contract_reference(black_box(tn)).unwrap())
        });
    }
    group.finish();
}

fn bench_planning(c: &mut Criterion) {
    let mut group = c.benchmark_group("planning");
    for (l1, l2) in [(4usize, 4usize), (6, 6), (8, 8)] {
        let tn = gaussian_torus(l1, l2, 2, 3);
        let label = format!("{l1}x{l2}");
        group.bench_with_input(BenchmarkId::new("greedy-order", &label), &tn, |b, tn| {
            b.iter(|| greedy_order(black_box(tn)))
        });
        let order = greedy_order(&tn);
        group.bench_with_input(BenchmarkId::new("plan", &label), &tn, |b, tn| {
            b.iter(|| plan_swallowing(black_box(tn), &order).unwrap())
        });
    }
    group.finish();
}

fn bench_norms_and_walk(c: &mut Criterion) {
    let mut group = c.benchmark_group("norm-and-walk");
    let tn = gaussian_torus(2, 4, 3, 23);
    let plan = plan_swallowing(&tn, &greedy_order(&tn)).unwrap();
    group.bench_function("delta-norms-2x4-d3", |b| {
        b.iter(|| delta_norms(black_box(&tn), &plan).unwrap())
    });

    let mut positive = gaussian_torus(2, 3, 2, 29);
    positive.map_entries(|_, _, e| num_complex::Complex64::new(e.norm(), 0.0));
    let trial_plan = plan_trials(&positive, None).unwrap();
    group.bench_function("positive-mc-1000-trials-2x3-d2", |b| {
        b.iter(|| mc_estimate(black_box(&trial_plan), 0.1, 7).unwrap())
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_swallow_vs_reference,
    bench_planning,
    bench_norms_and_walk
);
criterion_main!(benches);

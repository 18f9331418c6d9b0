use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use refstop::order::{random_order_value, RandomOrderMode};
use refstop::{best_ordering_exhaustive, brute_force_optimal, optimal_report, solve, solve_rho};
use refstop_bench::{lattice_batch, uniform_instance};

fn fixed_order(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve");
    for n in [4, 16, 64] {
        let inst = uniform_instance(n, 8, 2.0);
        group.bench_with_input(BenchmarkId::from_parameter(n), &inst, |b, inst| b.iter(|| solve(black_box(inst))));
    }
    group.finish();

    let batch = lattice_batch(50, 4);
    c.bench_function("optimal_report/lattice50", |b| {
        b.iter(|| batch.iter().map(|i| optimal_report(i).expected_value).sum::<f64>())
    });
    c.bench_function("brute_force/lattice50", |b| {
        b.iter(|| batch.iter().map(|i| brute_force_optimal(i).unwrap().expected_value).sum::<f64>())
    });
}

fn orders(c: &mut Criterion) {
    let inst = uniform_instance(8, 3, 1.0);
    c.bench_function("random_order/exact8", |b| {
        b.iter(|| random_order_value(black_box(&inst), RandomOrderMode::Exact).unwrap())
    });
    let small = uniform_instance(6, 2, 1.0);
    c.bench_function("random_order/mc6", |b| {
        b.iter(|| random_order_value(&small, RandomOrderMode::MonteCarlo { samples: 10_000, seed: 1 }).unwrap())
    });
    c.bench_function("exhaustive_ordering/6", |b| b.iter(|| best_ordering_exhaustive(&small).unwrap()));
    c.bench_function("rho/1e6", |b| b.iter(|| solve_rho(black_box(1e6), 1e-12).unwrap()));
}

criterion_group!(benches, fixed_order, orders);
criterion_main!(benches);

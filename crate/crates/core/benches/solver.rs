use std::hint::black_box;

use argwf_core::builders::{self, AfKind};
use argwf_core::exec::{Budget, Execution};
use argwf_core::solver::{brute_force_with, local_search, SearchOptions};
use argwf_testkit::{self as tk, Shape};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn exact(c: &mut Criterion) {
    let shape = Shape {
        max_operators: 4,
        max_jobs: 8,
        skills: 2,
        instruments: 0,
    };
    let inst = tk::random_instance_sized(&mut tk::rng(11), 4, 8, shape);
    let mut group = c.benchmark_group("brute_force_4x8");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| brute_force_with(black_box(&inst), exec, &Budget::unlimited()).unwrap())
        });
    }
    group.finish();
}

fn local(c: &mut Criterion) {
    let mut group = c.benchmark_group("local_search");
    group.sample_size(10);
    for (m, n) in [(5, 30), (10, 60)] {
        let shape = Shape {
            max_operators: m,
            max_jobs: n,
            skills: 3,
            instruments: 0,
        };
        let inst = tk::random_instance_sized(&mut tk::rng(m as u64), m, n, shape);
        for (name, exec) in MODES {
            let opts = SearchOptions {
                execution: exec,
                ..SearchOptions::default()
            };
            group.bench_with_input(BenchmarkId::new(name, format!("{m}x{n}")), &inst, |b, inst| {
                b.iter(|| local_search(inst, None, &opts).unwrap())
            });
        }
    }
    group.finish();
}

fn frameworks(c: &mut Criterion) {
    let shape = Shape {
        max_operators: 20,
        max_jobs: 20,
        skills: 4,
        instruments: 10,
    };
    let inst = tk::random_instance_sized(&mut tk::rng(20), 20, 20, shape);
    let sched = tk::random_schedule(&mut tk::rng(21), 20, 20);
    c.bench_function("all_frameworks_20x20", |b| {
        b.iter(|| {
            AfKind::ALL
                .map(|kind| builders::build(kind, black_box(&inst), black_box(&sched)).num_attacks())
        })
    });
}

criterion_group!(benches, exact, local, frameworks);
criterion_main!(benches);

//! Parallel (rayon) versus sequential kernels.
//!
//! The default `parallel` feature routes the hot loops through rayon; the
//! `*_serial` entry points always run single-threaded and produce identical
//! results, so these groups measure the speedup directly. Building the
//! bench with --no-default-features makes both sides sequential.

use arcspin::bounds::{cbar_estimate, cbar_estimate_serial, maximize_q, CbarSettings};
use arcspin::exact::{enumerate_clock, enumerate_clock_serial};
use arcspin::lattice::{Boundary, Lattice, LatticeSpec};
use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

fn bench_cbar(c: &mut Criterion) {
    let settings = CbarSettings {
        eta_grid: 48,
        quad_points: 1024,
    };
    let mut group = c.benchmark_group("cbar_row_estimate_q16");
    group.bench_function("parallel", |b| {
        b.iter(|| cbar_estimate(black_box(0.5), 16, 1, settings).unwrap())
    });
    group.bench_function("serial", |b| {
        b.iter(|| cbar_estimate_serial(black_box(0.5), 16, 1, settings).unwrap())
    });
    group.finish();
}

fn bench_enumeration(c: &mut Criterion) {
    let lattice = Lattice::build(LatticeSpec::new(2, 3, Boundary::Periodic)).unwrap();
    let mut group = c.benchmark_group("enumerate_3x3_q4");
    group.sample_size(20);
    group.bench_function("parallel", |b| {
        b.iter(|| enumerate_clock(&lattice, 4, black_box(0.8)).unwrap())
    });
    group.bench_function("serial", |b| {
        b.iter(|| enumerate_clock_serial(&lattice, 4, black_box(0.8)).unwrap())
    });
    group.finish();
}

fn bench_lemma_restarts(c: &mut Criterion) {
    // Restarts are embarrassingly parallel; the feature decides whether they
    // fan out. No serial twin is exposed, so this group tracks the default
    // path only.
    let mut group = c.benchmark_group("maximize_q_64_restarts");
    group.sample_size(20);
    group.bench_function("default", |b| {
        b.iter(|| maximize_q(black_box(6), 64, 9).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_cbar, bench_enumeration, bench_lemma_restarts);
criterion_main!(benches);

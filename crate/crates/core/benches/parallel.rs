//! Parallel against sequential evaluation of the three grid workloads.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hom_sensor::metrics::{ResponsivityMap, SignalAxis};
use hom_sensor::oracle::g2_oracle_point;
use hom_sensor::par::{map_indexed, map_indexed_seq};
use hom_sensor::tmm::{transmission_spectrum, transmission_spectrum_seq, uniform_grid, CoupledCavityDesign};
use hom_sensor::OperatingPoint;
use std::hint::black_box;

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn responsivity_map(c: &mut Criterion) {
    let mut group = c.benchmark_group("responsivity_map");
    let axis = SignalAxis::CouplingRatio;
    let f = |k: f64, g: f64| axis.responsivity(k, g);
    for n in [50, 200] {
        let ks = linspace(0.1, 5.0, n);
        let gs = linspace(0.01, 5.0, n);
        group.bench_with_input(BenchmarkId::new("parallel", n * n), &n, |b, _| {
            b.iter(|| ResponsivityMap::evaluate(black_box(&ks), &gs, f).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("sequential", n * n), &n, |b, _| {
            b.iter(|| ResponsivityMap::evaluate_seq(black_box(&ks), &gs, f).unwrap())
        });
    }
    group.finish();
}

fn spectrum(c: &mut Criterion) {
    let mut group = c.benchmark_group("transmission_spectrum");
    let stack = CoupledCavityDesign::default().build().unwrap();
    for n in [1_801, 90_001] {
        let grid = uniform_grid(940.0, 90.0 / (n - 1) as f64, n);
        group.bench_with_input(BenchmarkId::new("parallel", n), &grid, |b, grid| {
            b.iter(|| transmission_spectrum(&stack, black_box(grid)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("sequential", n), &grid, |b, grid| {
            b.iter(|| transmission_spectrum_seq(&stack, black_box(grid)).unwrap())
        });
    }
    group.finish();
}

fn oracle_grid(c: &mut Criterion) {
    let mut group = c.benchmark_group("oracle_grid");
    group.sample_size(10);
    let points: Vec<OperatingPoint> = [0.5, 1.8, 3.0]
        .iter()
        .flat_map(|&g| [1.0, 2.0].map(move |k| OperatingPoint::from_ratios(g, k, 0.5, 1.0).unwrap()))
        .collect();
    let eval = |i: usize| g2_oracle_point(&points[i]).unwrap().value;
    group.bench_function("parallel", |b| b.iter(|| map_indexed(points.len(), eval)));
    group.bench_function("sequential", |b| b.iter(|| map_indexed_seq(points.len(), eval)));
    group.finish();
}

criterion_group!(benches, responsivity_map, spectrum, oracle_grid);
criterion_main!(benches);

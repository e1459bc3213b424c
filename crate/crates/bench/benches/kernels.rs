use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use einsub::extrinsic::{extrinsic_report, TOL_UMBILIC};
use einsub::geometry::ricci_fd;
use einsub::immersions::{example_two, schwarzschild_default, BaseCurvature, Pullback, TorusPlacement};
use einsub::warpfunc::{integrate, schwarzschild_params};

fn integrate_warp(c: &mut Criterion) {
    let p = schwarzschild_params(5).unwrap();
    c.bench_function("integrate_n5_t5", |b| {
        b.iter(|| integrate(black_box(&p), 5.0, 1e-3).unwrap())
    });
}

fn ricci(c: &mut Criterion) {
    let spec = schwarzschild_default(5, 3.0, 1e-3).unwrap();
    let x = spec.chart.sample_points(1, 42, 0.1).remove(0);
    c.bench_function("ricci_fd_chart_n5", |b| {
        b.iter(|| ricci_fd(&spec.chart, black_box(&x), 1e-3, 0.0).unwrap())
    });
    let ex = example_two(7, 2, BaseCurvature::One, TorusPlacement::Lifted).unwrap();
    let y = ex.chart.sample_points(1, 42, 0.1).remove(0);
    c.bench_function("ricci_fd_pullback_n7", |b| {
        b.iter(|| ricci_fd(&Pullback(&ex), black_box(&y), 1e-3, 6.0).unwrap())
    });
}

fn jets(c: &mut Criterion) {
    let spec = schwarzschild_default(6, 3.0, 1e-3).unwrap();
    let x = spec.chart.sample_points(1, 42, 0.1).remove(0);
    c.bench_function("jet_schwarzschild_n6", |b| b.iter(|| spec.jet(black_box(&x)).unwrap()));
    c.bench_function("extrinsic_report_n6", |b| {
        b.iter(|| extrinsic_report(&spec, black_box(&x), 0.0, TOL_UMBILIC, Some(1e-3)).unwrap())
    });
}

criterion_group!(benches, integrate_warp, ricci, jets);
criterion_main!(benches);

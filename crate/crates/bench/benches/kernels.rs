//! Microbenchmarks for the hot numerical paths: special functions, the
//! fundamental-system construction, Green evaluation, and one RK4 step.

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use conelab_core::coords::StatePair;
use conelab_core::green::{CutoffSpec, GreenKernel};
use conelab_core::grid::RadialGrid;
use conelab_core::rng::CounterRng;
use conelab_core::semigroup::{linear_evolve, riesz_setup};
use conelab_core::specfun::{connection_coefficient, hyp2f1, HypergeometricParams};
use conelab_core::volterra::{build_u_pair, PotentialSpec};
use conelab_core::SpectralParameter;
use num_complex::Complex64 as C;

fn bench_specfun(c: &mut Criterion) {
    c.bench_function("connection_coefficient", |b| {
        b.iter(|| connection_coefficient(black_box(C::new(0.3, 4.2))).unwrap())
    });
    let p = HypergeometricParams::from_lambda(C::new(0.2, 1.5));
    c.bench_function("hyp2f1_series", |b| {
        b.iter(|| hyp2f1(black_box(p), black_box(C::new(0.55, 0.0))).unwrap())
    });
}

fn bench_pair(c: &mut Criterion) {
    let pot = PotentialSpec::linearization();
    c.bench_function("fundamental_pair_omega_10", |b| {
        b.iter(|| build_u_pair(black_box(SpectralParameter::new(0.1, 10.0)), &pot).unwrap())
    });
    c.bench_function("fundamental_pair_omega_100", |b| {
        b.iter(|| build_u_pair(black_box(SpectralParameter::new(0.0, 100.0)), &pot).unwrap())
    });
}

fn bench_green(c: &mut Criterion) {
    let pot = PotentialSpec::linearization();
    let kernel =
        GreenKernel::build(SpectralParameter::new(0.1, 10.0), &pot, CutoffSpec::default()).unwrap();
    c.bench_function("green_eval", |b| {
        b.iter(|| kernel.eval(black_box(0.4), black_box(0.7)))
    });
    c.bench_function("green_component_2", |b| {
        b.iter(|| kernel.component(2, black_box(0.4), black_box(0.7)).unwrap())
    });
}

fn bench_evolution(c: &mut Criterion) {
    let grid = RadialGrid::new(64);
    let pot = PotentialSpec::linearization();
    let proj = riesz_setup(&grid, &pot).unwrap();
    let mut rng = CounterRng::new(5).stream("bench");
    let state: StatePair =
        proj.apply_q(&conelab_core::harness::suites::random_band_limited(&grid, &mut rng, 8));
    c.bench_function("linear_evolve_tau_0.1", |b| {
        b.iter(|| linear_evolve(black_box(&state), 0.1, None, &pot))
    });
}

criterion_group!(benches, bench_specfun, bench_pair, bench_green, bench_evolution);
criterion_main!(benches);

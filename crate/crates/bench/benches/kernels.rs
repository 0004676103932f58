use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use decolab::gravity::decoherence_factor;
use decolab::langevin::{run_ensemble, EnsembleOptions};
use decolab::lindblad::{auto_dt, evolve};
use decolab::phase_space::wigner;
use decolab::special::ln_gamma;
use decolab::{
    cat_density, Complex64, Damping, DecoherenceForm, FockSpace, GravityBathParams, PhaseSpaceGrid, QedParams,
    SdeParams, Variant,
};

fn gravity(c: &mut Criterion) {
    c.bench_function("ln_gamma", |b| {
        b.iter(|| ln_gamma(black_box(Complex64::new(1.0 + 1e-3, 100.0))))
    });
    let p = GravityBathParams::default();
    c.bench_function("decoherence_factor_exact", |b| {
        b.iter(|| decoherence_factor(black_box(50.0), &p, DecoherenceForm::ExactGamma).unwrap())
    });
}

fn phase_space(c: &mut Criterion) {
    let rho = cat_density(Complex64::new(3.0, 0.0), Complex64::new(-3.0, 0.0), FockSpace::new(60).unwrap()).unwrap();
    let grid = PhaseSpaceGrid::square(8.0, 101).unwrap();
    c.bench_function("wigner_cat3_dim60_101x101", |b| b.iter(|| wigner(black_box(&rho), &grid).unwrap()));
}

fn lindblad(c: &mut Criterion) {
    let space = FockSpace::new(90).unwrap();
    let rho = cat_density(Complex64::new(3.0, 0.0), Complex64::new(-3.0, 0.0), space).unwrap();
    let l = Damping::TwoPhoton
        .build(space, &QedParams { gamma: 1e-3, nbar: 3.0, omega: 0.0 })
        .unwrap();
    let dt = auto_dt(&rho, &l);
    c.bench_function("two_photon_dim90_100_steps", |b| {
        b.iter(|| evolve(black_box(&rho), &l, &[100.0 * dt], dt).unwrap())
    });
}

fn langevin(c: &mut Criterion) {
    let mut p = SdeParams::new(3e-3, 8.0);
    p.n_traj = 256;
    let opts = EnsembleOptions { t_final: 10.0, sample_stride: 100, window: None };
    let mut group = c.benchmark_group("langevin");
    group.sample_size(10);
    group.bench_function("ensemble_256x10000_steps", |b| {
        b.iter(|| run_ensemble(black_box(Complex64::new(4.0, 0.0)), &p, Variant::Nonrwa, &opts).unwrap())
    });
    group.finish();
}

criterion_group!(benches, gravity, phase_space, lindblad, langevin);
criterion_main!(benches);

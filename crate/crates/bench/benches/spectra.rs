use std::f64::consts::PI;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use optomech_core::*;

fn spectrum(c: &mut Criterion) {
    let s = SystemParams::table_one().resolve().unwrap();
    let noise = InputNoise::from_state(&s);
    let grid = SweepSpec::new(
        SweepParameter::Omega,
        2.0 * PI * 1e4,
        2.0 * PI * 1e7,
        1000,
        SweepScale::Log,
    )
    .unwrap()
    .values();
    c.bench_function("homodyne_spectrum_1000", |b| {
        b.iter(|| homodyne_spectrum(black_box(&s), PI / 2.0, &noise, &grid).unwrap())
    });
}

fn cooling(c: &mut Criterion) {
    let p = SystemParams::table_one();
    let sweep = SweepSpec::default_gamma0();
    c.bench_function("cooling_sweep_200", |b| {
        b.iter(|| cooling_sweep(black_box(&p), &sweep, OccupancyModel::HighTemperature).unwrap())
    });
}

fn dip(c: &mut Criterion) {
    let mut p = SystemParams::table_one();
    p.gamma0 = 2.0 * PI * 3e5;
    let s = p.resolve().unwrap();
    let noise = InputNoise::vacuum(&s);
    c.bench_function("find_dip", |b| {
        b.iter(|| find_dip(black_box(&s), DipTarget::SignalPort, &noise).unwrap())
    });
}

criterion_group!(benches, spectrum, cooling, dip);
criterion_main!(benches);

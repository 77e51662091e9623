// Copyright 2026 The rydberg-oct Authors
// SPDX-License-Identifier: Apache-2.0

use criterion::{black_box, criterion_group, criterion_main, BatchSize, Criterion};
use rydberg_oct_bench::{guess, register, register_basis};
use rydberg_oct_core::atomic::{build_hamiltonian, dipole_matrix_element, RadialGrid, StateLabel};
use rydberg_oct_core::oct::{optimize, OctProblem};
use rydberg_oct_core::propagator::{propagate, Record, SplitOperator};
use rydberg_oct_core::pulses::{husimi, linspace, spectrum};
use rydberg_oct_core::register::encode;
use rydberg_oct_core::units::ps_to_au;
use rydberg_oct_core::{BasisSpec, PenaltySchedule, QuantumDefects, ZEigensystem};

fn atomic(c: &mut Criterion) {
    let grid = RadialGrid::for_n_max(31, RadialGrid::DEFAULT_POINTS).unwrap();
    let cs = QuantumDefects::cesium();
    let (a, b) = (StateLabel::new(26, 1).unwrap(), StateLabel::new(25, 2).unwrap());
    c.bench_function("dipole 26p-25d", |bench| {
        bench.iter(|| dipole_matrix_element(black_box(a), black_box(b), &cs, &grid).unwrap())
    });
    let mut g = c.benchmark_group("basis");
    g.sample_size(10);
    let spec = BasisSpec::new(21, 31, 5, cs).unwrap();
    g.bench_function("build 55 states", |bench| bench.iter(|| build_hamiltonian(black_box(&spec)).unwrap()));
    g.finish();
}

fn propagation(c: &mut Criterion) {
    let h = register_basis(17);
    let zsys = ZEigensystem::new(&h).unwrap();
    let psi = encode(&register(), &h).unwrap();
    c.bench_function("split step 187 states", |bench| {
        let mut op = SplitOperator::new(&h, &zsys);
        let mut v = psi.amplitudes.clone();
        bench.iter(|| op.step(v.as_mut_slice(), black_box(2e-7), 413.41))
    });
    let pulse = guess(8.0);
    let mut g = c.benchmark_group("propagate");
    g.sample_size(20);
    g.bench_function("8 ps on 187 states", |bench| {
        bench.iter(|| propagate(&psi, &pulse, &h, &zsys, Record::FinalOnly))
    });
    g.finish();
}

fn control(c: &mut Criterion) {
    let h = register_basis(17);
    let reg = register();
    let pulse = guess(8.0);
    let penalty = PenaltySchedule::with_defaults(&pulse).unwrap();
    let mut g = c.benchmark_group("krotov");
    g.sample_size(10);
    g.bench_function("one iteration, 187 states", |bench| {
        bench.iter_batched(
            || {
                OctProblem::new(&h, encode(&reg, &h).unwrap(), reg.marked_label().unwrap(), pulse.clone(), penalty.clone())
                    .unwrap()
                    .with_iterations(1, 0.0)
            },
            |p| optimize(&p).unwrap(),
            BatchSize::LargeInput,
        )
    });
    g.finish();
}

fn analysis(c: &mut Criterion) {
    let pulse = guess(8.0);
    c.bench_function("spectrum 801 samples", |bench| bench.iter(|| spectrum(black_box(&pulse))));
    let freqs = linspace(0.0, 4e-4, 200);
    let mut g = c.benchmark_group("husimi");
    g.sample_size(10);
    g.bench_function("200 x 201 map", |bench| {
        bench.iter(|| husimi(black_box(&pulse), ps_to_au(0.25), 4, &freqs).unwrap())
    });
    g.finish();
}

criterion_group!(benches, atomic, propagation, control, analysis);
criterion_main!(benches);

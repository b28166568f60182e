use std::f64::consts::FRAC_PI_4;
use std::hint::black_box;

use aa_cnot::linalg::{kron, sigma_x, sigma_y, sigma_z};
use aa_cnot::*;
use criterion::{criterion_group, criterion_main, Criterion};

fn params() -> SpinPairParams {
    SpinPairParams::new(500.0, 300.0, 1.0)
}

fn expm(c: &mut Criterion) {
    let h = &(&kron(&sigma_x(), &sigma_y()).unwrap() + &kron(&sigma_z(), &sigma_x()).unwrap().scale_re(0.7))
        + &kron(&sigma_z(), &sigma_z()).unwrap().scale_re(1.3);
    c.bench_function("expm_hermitian_4x4", |b| {
        b.iter(|| expm_hermitian(black_box(&h), 0.37).unwrap())
    });
}

fn gate(c: &mut Criterion) {
    let p = params();
    c.bench_function("gate_instantaneous", |b| {
        b.iter(|| {
            analyze_gate(
                black_box(FRAC_PI_4),
                &p,
                PulseModel::Instantaneous,
                Accounting::ControlFrame,
            )
            .unwrap()
        })
    });
    c.bench_function("gate_hard_pulses", |b| {
        b.iter(|| {
            gate_propagator(
                black_box(FRAC_PI_4),
                &p,
                PulseModel::Hard { rf_amplitude: 100.0 },
                Accounting::Physical,
            )
            .unwrap()
        })
    });
}

fn phases(c: &mut Criterion) {
    let p = params();
    let seq = aa_cnot_sequence(FRAC_PI_4, &p).unwrap();
    let s = realize_control_frame(&seq, &p, ControlState::Up).unwrap();
    let traj = propagate(&s, &StateVector::plus(), DEFAULT_SAMPLES_PER_SEGMENT).unwrap();
    c.bench_function("propagate_2000", |b| {
        b.iter(|| propagate(&s, black_box(&StateVector::plus()), DEFAULT_SAMPLES_PER_SEGMENT).unwrap())
    });
    c.bench_function("solid_angle_4000", |b| {
        b.iter(|| solid_angle(black_box(&traj.bloch_a)).unwrap())
    });
}

fn selectivity(c: &mut Criterion) {
    let p = params();
    let mut group = c.benchmark_group("selectivity");
    group.sample_size(10);
    group.bench_function("one_separation", |b| {
        b.iter(|| selectivity_experiment(FRAC_PI_4, &p, 20.0, black_box(&[400.0])).unwrap())
    });
    group.finish();
}

criterion_group!(benches, expm, gate, phases, selectivity);
criterion_main!(benches);

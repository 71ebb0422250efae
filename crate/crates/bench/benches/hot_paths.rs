use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use nalgebra::DVector;
use wbctl_core::admittance::AdmittanceState;
use wbctl_core::analysis::cross_correlation;
use wbctl_core::controller::{compute_torques, ImpedanceGains};
use wbctl_core::model::{forward_kinematics, jacobian_ee, mass_matrix};
use wbctl_core::sim::{default_posture, run, scripted_phase1, PhaseOptions};
use wbctl_core::{JointState, KinematicChain, PriorityWeights, Scenario, SignalSeries};

fn moving_state() -> JointState {
    let q = default_posture();
    let qd = DVector::from_fn(q.len(), |i, _| 0.1 * (i as f64 + 1.0).sin());
    JointState { q, qd }
}

fn model(c: &mut Criterion) {
    let chain = KinematicChain::default_arm();
    let state = moving_state();
    c.bench_function("mass_matrix", |b| b.iter(|| mass_matrix(black_box(&chain), black_box(&state)).unwrap()));
    c.bench_function("jacobian_ee", |b| b.iter(|| jacobian_ee(black_box(&chain), black_box(&state)).unwrap()));
}

fn controller(c: &mut Criterion) {
    let chain = KinematicChain::default_arm();
    let state = moving_state();
    let gains = ImpedanceGains::default_for(&chain, &state.q).unwrap();
    let ee = forward_kinematics(&chain, &state).unwrap();
    let mut x_d = AdmittanceState::hold(&ee.pose());
    x_d.position.x += 0.02;
    let weights = PriorityWeights::uniform(1.0);
    c.bench_function("compute_torques", |b| {
        b.iter(|| compute_torques(&chain, black_box(&state), &x_d, &gains, &weights).unwrap())
    });
}

fn simulation(c: &mut Criterion) {
    let mut g = c.benchmark_group("simulation");
    g.sample_size(10);
    let hold = Scenario::hold(&default_posture(), 1.0);
    g.bench_function("hold_1s", |b| b.iter(|| run(black_box(&hold)).unwrap()));
    let mut phase1 = scripted_phase1(&PhaseOptions::default());
    phase1.duration = 1.0;
    g.bench_function("phase1_first_1s", |b| b.iter(|| run(black_box(&phase1)).unwrap()));
    g.finish();
}

fn analysis(c: &mut Criterion) {
    let n = 20_000;
    let wave = |phase: f64| -> Vec<f64> { (0..n).map(|i| (i as f64 * 0.01 + phase).sin() + 0.3 * (i as f64 * 0.137).cos()).collect() };
    let x = SignalSeries::new(wave(0.0), 1000.0, "x").unwrap();
    let y = SignalSeries::new(wave(0.4), 1000.0, "y").unwrap();
    c.bench_function("cross_correlation_20k", |b| b.iter(|| cross_correlation(black_box(&x), black_box(&y)).unwrap()));
}

criterion_group!(benches, model, controller, simulation, analysis);
criterion_main!(benches);

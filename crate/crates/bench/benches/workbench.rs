use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use twsbr_core::analysis::poly_roots;
use twsbr_core::controllers::{discretize_tustin, flc_step, leadlag_tf, ControllerConfig, ControllerKind, Flc, FlcConfig, LeadLagParams, PidState};
use twsbr_core::plant::rk4_step;
use twsbr_core::sim::{run_closed_loop, Scenario};
use twsbr_core::{PlantState, RobotParams, WheelTorque};

fn plant(c: &mut Criterion) {
    let p = RobotParams::reference();
    let s = PlantState::tilted(0.1);
    let tau = WheelTorque::symmetric(0.01);
    c.bench_function("rk4_step", |b| b.iter(|| rk4_step(&p, black_box(&s), &tau, 5e-4).unwrap()));
}

fn analysis(c: &mut Criterion) {
    let quintic = [1.0, 17.3, 98.2, 240.0, 310.5, 12.7];
    c.bench_function("poly_roots_degree5", |b| b.iter(|| poly_roots(black_box(&quintic), 1e-10).unwrap()));
    let tf = leadlag_tf(&LeadLagParams::reference());
    c.bench_function("discretize_tustin_leadlag", |b| b.iter(|| discretize_tustin(black_box(&tf), 200.0).unwrap()));
}

fn fuzzy(c: &mut Criterion) {
    let flc = Flc::new(FlcConfig::reference()).unwrap();
    let st = PidState::default();
    c.bench_function("flc_step", |b| b.iter(|| flc_step(&flc, black_box(0.003), &st, 5e-3)));
}

fn closed_loop(c: &mut Criterion) {
    let mut group = c.benchmark_group("closed_loop_1s");
    group.sample_size(20);
    for kind in [ControllerKind::Pid, ControllerKind::LeadLag, ControllerKind::Flc] {
        let mut s = Scenario::nominal(ControllerConfig::reference(kind));
        s.duration = 1.0;
        group.bench_function(kind.as_str(), |b| b.iter(|| run_closed_loop(black_box(&s)).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, plant, analysis, fuzzy, closed_loop);
criterion_main!(benches);

//! Ensemble throughput: sequential loop versus the rayon-backed map.
//!
//! With default features both variants run; `--no-default-features` leaves
//! only the sequential path (threads parameters then fall back to it). The
//! outputs are identical byte-for-byte either way, so this suite is purely
//! about wall-clock.

use criterion::{criterion_group, criterion_main, Criterion};
use sa_lab_core::engine::{run_ensemble, DiagnosticsConfig, Scenario};
use sa_lab_core::noise::NoiseModel;
use sa_lab_core::operators::make_selector_control;
use sa_lab_core::schedules::StepSchedule;
use std::hint::black_box;

fn selector_scenario() -> Scenario {
    Scenario {
        name: "bench".into(),
        operator: make_selector_control(),
        noise: NoiseModel::three_point(0.1, 1.0, 0.8, 1.6, 0.5, 2).unwrap(),
        schedule: StepSchedule::polynomial(0.1, 1.0, 0.8).unwrap(),
        x0: vec![1.0, -1.0],
        horizon: 20_000,
        diagnostics: DiagnosticsConfig::default(),
    }
}

fn bench_ensemble(c: &mut Criterion) {
    let scenario = selector_scenario();
    let n = 32u64;

    let mut group = c.benchmark_group("ensemble");
    group.sample_size(10);

    group.bench_function("sequential", |b| {
        b.iter(|| black_box(run_ensemble(&scenario, n, 42, 1).unwrap()))
    });

    #[cfg(feature = "parallel")]
    group.bench_function("parallel_auto", |b| {
        b.iter(|| black_box(run_ensemble(&scenario, n, 42, 0).unwrap()))
    });

    group.finish();
}

criterion_group!(benches, bench_ensemble);
criterion_main!(benches);

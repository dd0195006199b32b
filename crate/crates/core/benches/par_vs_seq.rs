//! Sweep throughput: rayon data-parallel jobs vs the sequential fallback.

use canon_core::averaging::solve_second_order;
use canon_core::exact::DrivenOscillatorExact;
use canon_core::oracle::{l2_distance, sample_times};
use canon_core::scenario::{build_at, Scenario};
use canon_core::sweep::{run_sweep, run_sweep_sequential};
use criterion::{black_box, criterion_group, criterion_main, Criterion};

/// One representative per-strength job: solve the abrupt scenario at second
/// order and sup-compare against the closed form over the sampled horizon.
fn abrupt_sup(eps: f64) -> f64 {
    let params = Scenario::AbruptField.default_params();
    let b = build_at(Scenario::AbruptField, &params, eps).unwrap();
    let profile = b.profile.as_ref().unwrap();
    let exact = DrivenOscillatorExact::new(profile).unwrap();
    let n = b.problem.dim();
    let o2 = solve_second_order(&b.problem, params.horizon_constant).unwrap();
    sample_times(b.t_end, b.fastest_frequency, &[])
        .iter()
        .map(|&t| l2_distance(&o2.coefficients(t), &exact.coefficients(t, n)))
        .fold(0.0, f64::max)
}

fn bench_sweep(c: &mut Criterion) {
    let eps = vec![0.2, 0.1, 0.05, 0.025];
    let mut group = c.benchmark_group("epsilon-sweep");
    group.sample_size(10);
    group.bench_function("parallel", |b| {
        b.iter(|| run_sweep(black_box(&eps), abrupt_sup));
    });
    group.bench_function("sequential", |b| {
        b.iter(|| run_sweep_sequential(black_box(&eps), abrupt_sup));
    });
    group.finish();
}

criterion_group!(benches, bench_sweep);
criterion_main!(benches);

//! Oracle cross-checks: closed-form agreement and truncation stability.

use canon_core::oracle::{integrate, l2_distance, sample_times};
use canon_core::{build_at, DrivenOscillatorExact, Scenario};

#[test]
fn oracle_tracks_the_sinusoidal_closed_form() {
    let mut params = Scenario::HarmonicNonresonant.default_params();
    params.n_modes = 12;
    let built = build_at(Scenario::HarmonicNonresonant, &params, 0.1).unwrap();
    let exact = DrivenOscillatorExact::new(built.profile.as_ref().unwrap()).unwrap();

    let times = sample_times(built.t_end, built.fastest_frequency, &built.feature_times);
    let traj = integrate(&built.problem, built.t_end, 1e-11, &times).unwrap();

    let mut worst = 0.0f64;
    for (idx, &t) in traj.times.iter().enumerate() {
        let want = exact.coefficients(t, params.n_modes);
        worst = worst.max(l2_distance(traj.state_at(idx), &want));
    }
    assert!(worst < 1e-9, "oracle vs closed form: {worst:.3e}");
}

/// Doubling the horizon of the basis changes nothing the first N modes see.
fn truncation_stable(scenario: Scenario) {
    let params = scenario.default_params();
    let n = params.n_modes;

    let small = build_at(scenario, &params, params.epsilon).unwrap();
    let mut wide_params = params.clone();
    wide_params.n_modes = n + 4;
    let wide = build_at(scenario, &wide_params, params.epsilon).unwrap();

    let times = sample_times(small.t_end, small.fastest_frequency, &small.feature_times);
    let a = integrate(&small.problem, small.t_end, 1e-10, &times).unwrap();
    let b = integrate(&wide.problem, small.t_end, 1e-10, &times).unwrap();

    let mut worst = 0.0f64;
    for idx in 0..a.times.len() {
        worst = worst.max(l2_distance(a.state_at(idx), &b.state_at(idx)[..n]));
    }
    assert!(worst < 1e-6, "{scenario}: truncation sensitivity {worst:.3e}");
}

#[test]
fn truncation_is_stable_under_four_extra_modes() {
    truncation_stable(Scenario::AbruptField);
    truncation_stable(Scenario::HarmonicNonresonant);
}

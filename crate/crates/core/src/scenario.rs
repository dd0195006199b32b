//! Named benchmark scenarios: canonical problem builders, error-vs-epsilon
//! sweeps with fitted convergence orders, and feature checks against closed
//! forms and the reference integrator.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::adiabatic::{born_fock, post_adiabatic};
use crate::averaging::{
    averaged_hamiltonians, frequency_shifts, solve_first_order, solve_second_order, standard_pt,
};
use crate::drive::{
    displacement_coupling, oscillator_spectrum, velocity_coupling, DriveKind, DriveProfile,
};
use crate::error::CoreError;
use crate::exact::{truncated_expansion, wavefunction_value, DrivenOscillatorExact, SlowDriveExact};
use crate::hermite::{gh_integrate, HermiteBasis};
use crate::ladder::resonant_ladder;
use crate::model::{CouplingModel, PerturbationProblem, SpectrumModel};
use crate::oracle::{self, l2_distance, sample_times, sup_error, Trajectory};
use crate::stats::{fit_order, linear_fit, unwrap_phase};
use crate::sweep::run_sweep;
use crate::trig::TrigSum;
use crate::two_level::two_level_reduce;

/// Acceptance window for a first-order error curve's fitted slope.
pub const ORDER1_WINDOW: (f64, f64) = (0.75, 1.25);
/// Acceptance window for a second-order error curve's fitted slope.
pub const ORDER2_WINDOW: (f64, f64) = (1.75, 2.25);

/// Oracle tolerance for routine comparison runs.
const SWEEP_TOL: f64 = 1e-10;
/// Tighter tolerance for long integrations (phase regressions, the resonant
/// climb), keeping norm drift well under the integrator's hard limit.
const LONG_RUN_TOL: f64 = 5e-12;
/// Detunings probed by the frequency-shift feature checks.
const SHIFT_DETUNINGS: [f64; 3] = [0.5, 2.0, 5.0];
/// High-frequency detuning probed at a tighter relative tolerance.
const SHIFT_HIGH_FREQUENCY: f64 = 50.0;

/// The built-in benchmark problems.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scenario {
    /// Oscillator kicked by a constant field switched on at t = 0.
    AbruptField,
    /// Degenerate pair driven on resonance, exchanging its population.
    TwoLevel,
    /// Oscillator displaced by a slow Gaussian pulse.
    AdiabaticGaussian,
    /// Oscillator under an off-resonance sinusoidal drive.
    HarmonicNonresonant,
    /// Oscillator driven exactly on resonance, climbing the ladder.
    HarmonicResonant,
}

impl Scenario {
    pub const ALL: [Scenario; 5] = [
        Scenario::AbruptField,
        Scenario::TwoLevel,
        Scenario::AdiabaticGaussian,
        Scenario::HarmonicNonresonant,
        Scenario::HarmonicResonant,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::AbruptField => "abrupt-field",
            Scenario::TwoLevel => "two-level",
            Scenario::AdiabaticGaussian => "adiabatic-gaussian",
            Scenario::HarmonicNonresonant => "harmonic-nonresonant",
            Scenario::HarmonicResonant => "harmonic-resonant",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Scenario::AbruptField => {
                "oscillator kicked by a constant field switched on at t = 0"
            }
            Scenario::TwoLevel => {
                "degenerate pair driven on resonance, exchanging its population"
            }
            Scenario::AdiabaticGaussian => "oscillator displaced by a slow Gaussian pulse",
            Scenario::HarmonicNonresonant => "oscillator under an off-resonance sinusoidal drive",
            Scenario::HarmonicResonant => {
                "oscillator driven exactly on resonance, climbing the ladder"
            }
        }
    }

    pub fn default_params(self) -> ScenarioParams {
        let base = ScenarioParams {
            n_modes: 8,
            epsilon: 0.1,
            epsilon_sweep: vec![0.2, 0.1, 0.05],
            nu: 0.0,
            coupling_g: 0.0,
            delta0: 0.0,
            tau0: 5.0,
            width: 1.0,
            pulse_amp: 1.0,
            horizon_constant: 1.0,
            t_end: None,
        };
        match self {
            Scenario::AbruptField => base,
            Scenario::TwoLevel => ScenarioParams {
                n_modes: 2,
                epsilon: 0.05,
                epsilon_sweep: vec![0.1, 0.05, 0.025],
                coupling_g: 1.0,
                ..base
            },
            // The smallest strengths keep the order fit inside its window;
            // eps = 0.2 still carries visible third-order contamination.
            Scenario::AdiabaticGaussian => ScenarioParams {
                horizon_constant: 10.0,
                epsilon_sweep: vec![0.1, 0.05, 0.025],
                ..base
            },
            Scenario::HarmonicNonresonant => ScenarioParams { nu: 2.0, ..base },
            Scenario::HarmonicResonant => ScenarioParams {
                n_modes: 24,
                epsilon: 0.002,
                epsilon_sweep: vec![0.002],
                nu: 1.0,
                t_end: Some(2000.0),
                ..base
            },
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self, CoreError> {
        Scenario::ALL
            .iter()
            .copied()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| CoreError::UnknownScenario(s.to_string()))
    }
}

/// Knobs of a scenario. Fields irrelevant to a given scenario are ignored.
#[derive(Clone, Debug)]
pub struct ScenarioParams {
    pub n_modes: usize,
    /// Primary perturbation strength (drive amplitude, or slowness for the
    /// adiabatic scenario).
    pub epsilon: f64,
    /// Strengths swept for the convergence-order fits.
    pub epsilon_sweep: Vec<f64>,
    /// Drive frequency (sinusoidal scenarios).
    pub nu: f64,
    /// Slow coupling strength of the two-level pair.
    pub coupling_g: f64,
    /// Two-level detuning in units of epsilon.
    pub delta0: f64,
    /// Pulse center on the slow time axis.
    pub tau0: f64,
    /// Pulse width on the slow time axis.
    pub width: f64,
    /// Pulse amplitude (the adiabatic scenario's epsilon is the slowness).
    pub pulse_amp: f64,
    /// Horizon constant C in t_end = C / epsilon.
    pub horizon_constant: f64,
    /// Absolute horizon override.
    pub t_end: Option<f64>,
}

/// A scenario instantiated at one perturbation strength.
pub struct ScenarioBuild {
    pub problem: PerturbationProblem,
    /// The displacement drive, when the scenario has one.
    pub profile: Option<DriveProfile>,
    pub t_end: f64,
    /// Fastest frequency present, setting the comparison sampling density.
    pub fastest_frequency: f64,
    /// Times that must appear among the comparison samples.
    pub feature_times: Vec<f64>,
}

fn ground_state(n: usize) -> Vec<Complex64> {
    let mut c0 = vec![Complex64::new(0.0, 0.0); n];
    c0[0] = Complex64::new(1.0, 0.0);
    c0
}

pub fn build(scenario: Scenario, params: &ScenarioParams) -> Result<ScenarioBuild, CoreError> {
    build_at(scenario, params, params.epsilon)
}

/// Instantiate a scenario at an explicit strength (sweeps override the
/// primary epsilon point by point).
pub fn build_at(
    scenario: Scenario,
    params: &ScenarioParams,
    epsilon: f64,
) -> Result<ScenarioBuild, CoreError> {
    let n = params.n_modes;
    match scenario {
        Scenario::AbruptField => {
            let profile = DriveProfile::new(DriveKind::AbruptConstant, epsilon);
            let problem = PerturbationProblem::new(
                SpectrumModel::stationary(oscillator_spectrum(n)),
                displacement_coupling(n, &profile)?,
                epsilon,
                ground_state(n),
            )?;
            let t_end = params.t_end.unwrap_or(params.horizon_constant / epsilon);
            Ok(ScenarioBuild {
                problem,
                profile: Some(profile),
                t_end,
                fastest_frequency: (n - 1) as f64,
                feature_times: vec![t_end],
            })
        }
        Scenario::TwoLevel => {
            let nu = 1.0 + epsilon * params.delta0;
            let two_g = 2.0 * params.coupling_g;
            let cos = TrigSum::cosine(two_g, nu);
            let zero = TrigSum::zero();
            let v = vec![vec![zero.clone(), cos.clone()], vec![cos, zero]];
            let problem = PerturbationProblem::new(
                SpectrumModel::stationary(vec![0.5, 1.5]),
                CouplingModel::Trig(v),
                epsilon,
                ground_state(2),
            )?;
            let system = two_level_reduce(&problem, 0, 1)?;
            let t_end = params.t_end.unwrap_or(system.period());
            Ok(ScenarioBuild {
                problem,
                profile: None,
                t_end,
                fastest_frequency: nu + 1.0,
                feature_times: vec![0.5 * t_end, t_end],
            })
        }
        Scenario::AdiabaticGaussian => {
            let kind = DriveKind::GaussianPulse { tau0: params.tau0, width: params.width };
            let profile = DriveProfile::new(kind, params.pulse_amp);
            let coupling = velocity_coupling(n, &profile, epsilon)?;
            let for_omega = profile.clone();
            let spectrum = SpectrumModel::adiabatic(oscillator_spectrum(n), move |tau| {
                let xi = for_omega.xi(tau);
                (0..n).map(|k| k as f64 + 0.5 - 0.5 * xi * xi).collect()
            });
            let problem = PerturbationProblem::new(spectrum, coupling, epsilon, ground_state(n))?;
            let t_end = params.t_end.unwrap_or(params.horizon_constant / epsilon);
            let half_width = params.width / 2f64.sqrt();
            let feature_times = vec![
                (params.tau0 - half_width) / epsilon,
                params.tau0 / epsilon,
                (params.tau0 + half_width) / epsilon,
                t_end,
            ];
            Ok(ScenarioBuild {
                problem,
                profile: Some(profile),
                t_end,
                fastest_frequency: (n - 1) as f64,
                feature_times,
            })
        }
        Scenario::HarmonicNonresonant => {
            let profile = DriveProfile::new(DriveKind::Sinusoidal { nu: params.nu }, epsilon);
            let problem = PerturbationProblem::new(
                SpectrumModel::stationary(oscillator_spectrum(n)),
                displacement_coupling(n, &profile)?,
                epsilon,
                ground_state(n),
            )?;
            let t_end = params.t_end.unwrap_or(params.horizon_constant / epsilon);
            Ok(ScenarioBuild {
                problem,
                profile: Some(profile),
                t_end,
                fastest_frequency: params.nu + (n - 1) as f64,
                feature_times: vec![t_end],
            })
        }
        Scenario::HarmonicResonant => {
            let profile = DriveProfile::new(DriveKind::ResonantCosine { nu: params.nu }, epsilon);
            let problem = PerturbationProblem::new(
                SpectrumModel::stationary(oscillator_spectrum(n)),
                displacement_coupling(n, &profile)?,
                epsilon,
                ground_state(n),
            )?;
            let t_end = params.t_end.unwrap_or(params.horizon_constant / epsilon);
            Ok(ScenarioBuild {
                problem,
                profile: Some(profile),
                t_end,
                // Sampling tracks the drive period; the mode-index ladder
                // spans larger frame gaps, but the populated amplitudes
                // evolve on the drive scale.
                fastest_frequency: params.nu.max(1.0),
                feature_times: vec![t_end],
            })
        }
    }
}

/// How a feature check compares its value to the expectation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckKind {
    /// |value - expected| <= tolerance.
    Within,
    /// value >= expected.
    AtLeast,
}

/// One named scalar check with its outcome.
#[derive(Clone, Debug)]
pub struct FeatureCheck {
    pub name: String,
    pub value: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub kind: CheckKind,
    pub pass: bool,
}

impl FeatureCheck {
    pub fn within(name: impl Into<String>, value: f64, expected: f64, tolerance: f64) -> Self {
        let pass = value.is_finite() && (value - expected).abs() <= tolerance;
        FeatureCheck {
            name: name.into(),
            value,
            expected,
            tolerance,
            kind: CheckKind::Within,
            pass,
        }
    }

    pub fn at_least(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        let pass = value.is_finite() && value >= threshold;
        FeatureCheck {
            name: name.into(),
            value,
            expected: threshold,
            tolerance: 0.0,
            kind: CheckKind::AtLeast,
            pass,
        }
    }
}

/// Sup error of one method at one strength.
#[derive(Clone, Copy, Debug)]
pub struct CurvePoint {
    pub epsilon: f64,
    pub sup_error: f64,
    pub t_end: f64,
}

/// An error-vs-epsilon curve with its fitted order. A curve without an
/// order window is informational and always passes.
#[derive(Clone, Debug)]
pub struct Curve {
    pub name: String,
    pub points: Vec<CurvePoint>,
    pub fitted_order: Option<f64>,
    pub order_window: Option<(f64, f64)>,
    pub pass: bool,
}

fn curve(name: &str, points: Vec<CurvePoint>, window: Option<(f64, f64)>) -> Curve {
    let eps: Vec<f64> = points.iter().map(|p| p.epsilon).collect();
    let errs: Vec<f64> = points.iter().map(|p| p.sup_error).collect();
    let fitted_order = fit_order(&eps, &errs).ok();
    let pass = match (window, fitted_order) {
        (None, _) => true,
        (Some((lo, hi)), Some(order)) => order >= lo && order <= hi,
        (Some(_), None) => false,
    };
    Curve { name: name.to_string(), points, fitted_order, order_window: window, pass }
}

/// Everything a scenario run measured.
#[derive(Clone, Debug)]
pub struct ScenarioReport {
    pub scenario: Scenario,
    pub epsilon: f64,
    pub curves: Vec<Curve>,
    pub features: Vec<FeatureCheck>,
}

impl ScenarioReport {
    pub fn passed(&self) -> bool {
        self.curves.iter().all(|c| c.pass) && self.features.iter().all(|f| f.pass)
    }
}

/// Opt-in baseline methods to measure alongside the averaged solvers.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CompareOptions {
    pub standard_pt: bool,
    pub born_fock: bool,
}

pub fn run_scenario(
    scenario: Scenario,
    params: &ScenarioParams,
) -> Result<ScenarioReport, CoreError> {
    run_scenario_with(scenario, params, CompareOptions::default())
}

pub fn run_scenario_with(
    scenario: Scenario,
    params: &ScenarioParams,
    compare: CompareOptions,
) -> Result<ScenarioReport, CoreError> {
    let (curves, features) = match scenario {
        Scenario::AbruptField => run_abrupt(params, compare)?,
        Scenario::TwoLevel => run_two_level(params)?,
        Scenario::AdiabaticGaussian => run_adiabatic(params, compare)?,
        Scenario::HarmonicNonresonant => run_nonresonant(params, compare)?,
        Scenario::HarmonicResonant => run_resonant(params)?,
    };
    Ok(ScenarioReport { scenario, epsilon: params.epsilon, curves, features })
}

/// Run `point` at every sweep strength (in parallel when enabled), splitting
/// the per-strength results into one point list per method.
fn sweep_points<F>(
    sweep: &[f64],
    n_methods: usize,
    point: F,
) -> Result<Vec<Vec<CurvePoint>>, CoreError>
where
    F: Fn(f64) -> Result<Vec<CurvePoint>, CoreError> + Sync,
{
    let jobs = run_sweep(sweep, point);
    let mut out = vec![Vec::new(); n_methods];
    for job in jobs {
        let pts = job?;
        assert_eq!(pts.len(), n_methods);
        for (list, p) in out.iter_mut().zip(pts) {
            list.push(p);
        }
    }
    Ok(out)
}

/// Sup errors of the averaged orders (and optionally standard perturbation
/// theory) against the closed form, swept over strengths.
fn fast_drive_curves(
    scenario: Scenario,
    params: &ScenarioParams,
    compare: CompareOptions,
) -> Result<Vec<Curve>, CoreError> {
    let n_methods = if compare.standard_pt { 3 } else { 2 };
    let lists = sweep_points(&params.epsilon_sweep, n_methods, |eps| {
        let b = build_at(scenario, params, eps)?;
        let profile = b.profile.as_ref().expect("fast scenario carries a profile");
        let exact = DrivenOscillatorExact::new(profile)?;
        let n = b.problem.dim();
        let times = sample_times(b.t_end, b.fastest_frequency, &b.feature_times);
        let o1 = solve_first_order(&b.problem, params.horizon_constant)?;
        let o2 = solve_second_order(&b.problem, params.horizon_constant)?;
        let sup_over = |coeffs: &dyn Fn(f64) -> Vec<Complex64>| {
            times
                .iter()
                .map(|&t| l2_distance(&coeffs(t), &exact.coefficients(t, n)))
                .fold(0.0, f64::max)
        };
        let mut pts = vec![
            CurvePoint { epsilon: eps, sup_error: sup_over(&|t| o1.coefficients(t)), t_end: b.t_end },
            CurvePoint { epsilon: eps, sup_error: sup_over(&|t| o2.coefficients(t)), t_end: b.t_end },
        ];
        if compare.standard_pt {
            let sp = standard_pt(&b.problem)?;
            pts.push(CurvePoint {
                epsilon: eps,
                sup_error: sup_over(&|t| sp.coefficients(t)),
                t_end: b.t_end,
            });
        }
        Ok(pts)
    })?;
    let mut lists = lists.into_iter();
    let mut curves = vec![
        curve("order-1-vs-exact", lists.next().unwrap(), Some(ORDER1_WINDOW)),
        curve("order-2-vs-exact", lists.next().unwrap(), Some(ORDER2_WINDOW)),
    ];
    if let Some(sp) = lists.next() {
        curves.push(curve("standard-pt-vs-exact", sp, None));
    }
    Ok(curves)
}

/// Projection probability onto the first eigenstate of the displaced well,
/// by Gauss-Hermite quadrature of the position-space overlap.
fn shifted_transition_probability(
    exact: &DrivenOscillatorExact,
    profile: &DriveProfile,
    t: f64,
) -> f64 {
    let s = profile.xi(t);
    let c0 = exact.c0(t);
    let gamma = exact.coherent(t);
    let basis = HermiteBasis::new(2, s);
    let center = 0.5 * s;
    let amp = gh_integrate(64, center, |x| {
        let reweight = ((x - center) * (x - center)).exp();
        basis.value(1, x) * wavefunction_value(c0, gamma, t, x) * reweight
    });
    amp.norm_sqr()
}

fn run_abrupt(
    params: &ScenarioParams,
    compare: CompareOptions,
) -> Result<(Vec<Curve>, Vec<FeatureCheck>), CoreError> {
    let curves = fast_drive_curves(Scenario::AbruptField, params, compare)?;

    let eps = params.epsilon;
    let b = build(Scenario::AbruptField, params)?;
    let profile = b.profile.as_ref().expect("abrupt scenario carries a profile");
    let exact = DrivenOscillatorExact::new(profile)?;
    let n = b.problem.dim();
    let o2 = solve_second_order(&b.problem, params.horizon_constant)?;
    let t_star = b.t_end;
    let mut features = Vec::new();

    // The ground amplitude keeps its secular phase e^{i eps^2 t / 2}.
    let got = o2.coefficients(t_star)[0];
    let want = Complex64::new(0.0, 0.5 * eps * eps * t_star).exp();
    features.push(FeatureCheck::within("ground-secular-phase", (got - want).norm(), 0.0, 1e-10));

    // The second-order solver reproduces the truncated closed form termwise.
    let trunc = truncated_expansion(profile, eps, t_star, n)?;
    features.push(FeatureCheck::within(
        "order-2-matches-truncated-expansion",
        l2_distance(&o2.coefficients(t_star), &trunc),
        0.0,
        1e-12,
    ));

    // In the displaced eigenbasis the exact amplitudes are frozen; their
    // expansion through eps^2 (the basis-change of the solver output, which
    // the 1e-12 identity above pins in the bare basis) stays coefficient-wise
    // within 5 eps^3 of them over the whole validity horizon. The bare-basis
    // gap is O(eps^2): the dropped second neighbor carries |delta|^2/sqrt(2).
    for &eps_k in &params.epsilon_sweep {
        let bk = build_at(Scenario::AbruptField, params, eps_k)?;
        let pk = bk.profile.as_ref().expect("abrupt scenario carries a profile");
        let exact_k = DrivenOscillatorExact::new(pk)?;
        let nk = bk.problem.dim();
        let rt2 = 2f64.sqrt();
        let mut trunc = vec![Complex64::new(0.0, 0.0); nk];
        trunc[0] = Complex64::new(1.0 - eps_k * eps_k / 4.0, 0.0);
        trunc[1] = Complex64::new(-eps_k / rt2, 0.0);
        trunc[2] = Complex64::new(eps_k * eps_k / (2.0 * rt2), 0.0);
        let mut worst = 0.0f64;
        for &t in &sample_times(bk.t_end, bk.fastest_frequency, &bk.feature_times) {
            let want = exact_k.shifted_coefficients(t, nk);
            for (g, w) in trunc.iter().zip(&want) {
                worst = worst.max((g - w).norm());
            }
        }
        features.push(FeatureCheck::within(
            format!("shifted-expansion-bound-eps-{eps_k}"),
            worst,
            0.0,
            5.0 * eps_k.powi(3),
        ));
    }

    // Transition probability into the first displaced eigenstate, measured
    // by quadrature of the exact wavefunction.
    let p1 = shifted_transition_probability(&exact, profile, t_star);
    let want_p1 = 0.5 * eps * eps * (-0.5 * eps * eps).exp();
    features.push(FeatureCheck::within("shifted-transition-probability", p1, want_p1, 1e-4));

    // The brute-force integrator agrees with the closed form.
    let times = sample_times(b.t_end, b.fastest_frequency, &b.feature_times);
    let traj = oracle::integrate(&b.problem, b.t_end, SWEEP_TOL, &times)?;
    let sup = sup_error(&traj, |t| exact.coefficients(t, n), b.t_end);
    features.push(FeatureCheck::within("oracle-matches-exact", sup, 0.0, 1e-8));

    Ok((curves, features))
}

/// Linear-interpolated times at which `values` crosses `level`.
fn level_crossings(times: &[f64], values: &[f64], level: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 1..times.len() {
        let (a, b) = (values[i - 1], values[i]);
        if (a < level) != (b < level) {
            let frac = (level - a) / (b - a);
            out.push(times[i - 1] + frac * (times[i] - times[i - 1]));
        }
    }
    out
}

fn run_two_level(params: &ScenarioParams) -> Result<(Vec<Curve>, Vec<FeatureCheck>), CoreError> {
    let lists = sweep_points(&params.epsilon_sweep, 1, |eps| {
        let b = build_at(Scenario::TwoLevel, params, eps)?;
        let system = two_level_reduce(&b.problem, 0, 1)?;
        let times = sample_times(b.t_end, b.fastest_frequency, &b.feature_times);
        let traj = oracle::integrate(&b.problem, b.t_end, SWEEP_TOL, &times)?;
        let sup = sup_error(&traj, |t| system.coefficients(t), b.t_end);
        Ok(vec![CurvePoint { epsilon: eps, sup_error: sup, t_end: b.t_end }])
    })?;
    let curves = vec![curve(
        "pair-closed-form-vs-oracle",
        lists.into_iter().next().unwrap(),
        Some(ORDER1_WINDOW),
    )];

    let b = build(Scenario::TwoLevel, params)?;
    let system = two_level_reduce(&b.problem, 0, 1)?;
    let t_star = b.t_end;
    let times = sample_times(t_star, b.fastest_frequency, &b.feature_times);
    let traj = oracle::integrate(&b.problem, t_star, SWEEP_TOL, &times)?;
    let mut features = Vec::new();

    // Population returns to the initial mode after one exchange period.
    let end = traj.states.last().expect("trajectory has samples");
    features.push(FeatureCheck::within("return-population", end[0].norm_sqr(), 1.0, 1e-3));

    // Peak transfer reaches 4 |g|^2 / Delta^2.
    let pops: Vec<f64> = traj.states.iter().map(|s| s[1].norm_sqr()).collect();
    let peak = pops.iter().copied().fold(0.0, f64::max);
    let want_peak = 4.0 * system.g.norm_sqr() / (system.big_delta * system.big_delta);
    features.push(FeatureCheck::within("peak-transfer", peak, want_peak, 1e-3));

    // The measured exchange period (twice the gap between the two half-peak
    // crossings) matches 2 pi / (Delta eps).
    let crossings = level_crossings(&traj.times, &pops, 0.5 * peak);
    let period = if crossings.len() >= 2 {
        2.0 * (crossings[1] - crossings[0])
    } else {
        f64::NAN
    };
    features.push(FeatureCheck::within("exchange-period", period, system.period(), 1e-3 * t_star));

    // The closed form stays unitary.
    let norm_dev = times
        .iter()
        .map(|&t| {
            let c = system.coefficients(t);
            (c.iter().map(|z| z.norm_sqr()).sum::<f64>() - 1.0).abs()
        })
        .fold(0.0, f64::max);
    features.push(FeatureCheck::within("closed-form-unitarity", norm_dev, 0.0, 1e-12));

    // The closed form returns all population to the source mode after
    // exactly one exchange period.
    let analytic_return = system.coefficients(system.period())[0].norm_sqr();
    features.push(FeatureCheck::within("pair-return-analytic", analytic_return, 1.0, 1e-12));

    Ok((curves, features))
}

/// Distance between two angles on the circle.
fn wrapped_angle_distance(a: f64, b: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let d = (a - b).rem_euclid(two_pi);
    d.min(two_pi - d)
}

fn run_adiabatic(
    params: &ScenarioParams,
    compare: CompareOptions,
) -> Result<(Vec<Curve>, Vec<FeatureCheck>), CoreError> {
    let n_methods = if compare.born_fock { 2 } else { 1 };
    let lists = sweep_points(&params.epsilon_sweep, n_methods, |eps| {
        let b = build_at(Scenario::AdiabaticGaussian, params, eps)?;
        let profile = b.profile.as_ref().expect("adiabatic scenario carries a profile");
        let exact = SlowDriveExact::new(profile, eps, b.t_end)?;
        let n = b.problem.dim();
        let post = post_adiabatic(&b.problem, b.t_end)?;
        let bf = if compare.born_fock { Some(born_fock(&b.problem, b.t_end)?) } else { None };
        let times = sample_times(b.t_end, b.fastest_frequency, &b.feature_times);
        let mut sup_post = 0.0f64;
        let mut sup_bf = 0.0f64;
        for &t in &times {
            let reference = exact.instantaneous_coefficients(t, n)?;
            sup_post = sup_post.max(l2_distance(&post.coefficients(t)?, &reference));
            if let Some(bf) = &bf {
                sup_bf = sup_bf.max(l2_distance(&bf.coefficients(t)?, &reference));
            }
        }
        let mut pts =
            vec![CurvePoint { epsilon: eps, sup_error: sup_post, t_end: b.t_end }];
        if compare.born_fock {
            pts.push(CurvePoint { epsilon: eps, sup_error: sup_bf, t_end: b.t_end });
        }
        Ok(pts)
    })?;
    let mut lists = lists.into_iter();
    let mut curves =
        vec![curve("post-adiabatic-vs-exact", lists.next().unwrap(), Some(ORDER2_WINDOW))];
    if let Some(bf) = lists.next() {
        curves.push(curve("born-fock-vs-exact", bf, None));
    }

    let eps = params.epsilon;
    let b = build(Scenario::AdiabaticGaussian, params)?;
    let profile = b.profile.as_ref().expect("adiabatic scenario carries a profile");
    let exact = SlowDriveExact::new(profile, eps, b.t_end)?;
    let n = b.problem.dim();
    let post = post_adiabatic(&b.problem, b.t_end)?;
    let bf = born_fock(&b.problem, b.t_end)?;
    let t_star = b.t_end;
    let mut features = Vec::new();

    // The dressed ground phase beyond the bare adiabatic expansion equals
    // Theta = int xi_dot^2 / 2, computed independently from the drive.
    let c_post = post.coefficients(t_star)?[0];
    let c_bf = bf.coefficients(t_star)?[0];
    let theta = exact.theta(t_star)?;
    let diff = wrapped_angle_distance((c_post / c_bf).arg(), theta);
    features.push(FeatureCheck::within("ground-phase-vs-born-fock", diff, 0.0, 1e-6));

    // Excitation probability peaks where the drive velocity is extremal,
    // at tau0 -+ width / sqrt(2).
    let scan = |lo: f64, hi: f64| -> Result<f64, CoreError> {
        let steps = 650;
        let mut best_tau = lo;
        let mut best = -1.0f64;
        for i in 0..=steps {
            let tau = lo + (hi - lo) * i as f64 / steps as f64;
            let c0 = exact.instantaneous_coefficients(tau / eps, 1)?[0];
            let p = 1.0 - c0.norm_sqr();
            if p > best {
                best = p;
                best_tau = tau;
            }
        }
        Ok(best_tau)
    };
    let half_width = params.width / 2f64.sqrt();
    let left = scan(params.tau0 - 1.5 * params.width, params.tau0 - 0.2 * params.width)?;
    let right = scan(params.tau0 + 0.2 * params.width, params.tau0 + 1.5 * params.width)?;
    features.push(FeatureCheck::within(
        "excitation-peak-before",
        left,
        params.tau0 - half_width,
        0.02,
    ));
    features.push(FeatureCheck::within(
        "excitation-peak-after",
        right,
        params.tau0 + half_width,
        0.02,
    ));

    // The brute-force integrator agrees with the closed form.
    let times = sample_times(b.t_end, b.fastest_frequency, &b.feature_times);
    let traj = oracle::integrate(&b.problem, b.t_end, SWEEP_TOL, &times)?;
    let mut sup = 0.0f64;
    for (t, state) in traj.times.iter().zip(&traj.states) {
        sup = sup.max(l2_distance(state, &exact.instantaneous_coefficients(*t, n)?));
    }
    features.push(FeatureCheck::within("oracle-matches-exact", sup, 0.0, 1e-7));

    Ok((curves, features))
}

fn run_nonresonant(
    params: &ScenarioParams,
    compare: CompareOptions,
) -> Result<(Vec<Curve>, Vec<FeatureCheck>), CoreError> {
    let curves = fast_drive_curves(Scenario::HarmonicNonresonant, params, compare)?;

    let eps = params.epsilon;
    let mut features = Vec::new();

    // Frequency shift of the ground mode at several detunings: the averaged
    // solver's analytic value, and a phase regression on the integrator.
    let mut detunings: Vec<(f64, f64)> =
        SHIFT_DETUNINGS.iter().map(|&nu| (nu, 0.05)).collect();
    detunings.push((SHIFT_HIGH_FREQUENCY, 0.01));
    for (nu, rel_tol) in detunings {
        let mut p = params.clone();
        p.nu = nu;
        let b = build_at(Scenario::HarmonicNonresonant, &p, eps)?;
        let want = eps * eps / (4.0 * (nu * nu - 1.0));

        let avg = averaged_hamiltonians(&b.problem)?;
        let shifts = frequency_shifts(&avg)?;
        features.push(FeatureCheck::within(
            format!("shift-analytic-nu-{nu}"),
            shifts[0],
            want,
            1e-12,
        ));

        let t_phase = 400.0;
        let times = sample_times(t_phase, nu + 1.0, &[]);
        let traj = oracle::integrate(&b.problem, t_phase, LONG_RUN_TOL, &times)?;
        let phases: Vec<f64> = traj.states.iter().map(|s| s[0].arg()).collect();
        let unwrapped = unwrap_phase(&phases);
        let (slope, _) = linear_fit(&traj.times, &unwrapped)?;
        features.push(FeatureCheck::within(
            format!("oracle-phase-slope-nu-{nu}"),
            slope,
            -want,
            rel_tol * want.abs(),
        ));
    }

    // Standard perturbation theory misses the order-eps initial dressing.
    let b = build(Scenario::HarmonicNonresonant, params)?;
    let profile = b.profile.as_ref().expect("sinusoidal scenario carries a profile");
    let exact = DrivenOscillatorExact::new(profile)?;
    let n = b.problem.dim();
    let sp = standard_pt(&b.problem)?;
    let deficit = l2_distance(&sp.coefficients(0.0), &b.problem.initial);
    let want_deficit = eps * params.nu / (2f64.sqrt() * (params.nu * params.nu - 1.0));
    features.push(FeatureCheck::within(
        "standard-pt-initial-deficit",
        deficit,
        want_deficit.abs(),
        1e-12,
    ));

    // ... and its sup error dominates the averaged solver's by the horizon.
    let o2 = solve_second_order(&b.problem, params.horizon_constant)?;
    let times = sample_times(b.t_end, b.fastest_frequency, &b.feature_times);
    let sup_over = |coeffs: &dyn Fn(f64) -> Vec<Complex64>| {
        times
            .iter()
            .map(|&t| l2_distance(&coeffs(t), &exact.coefficients(t, n)))
            .fold(0.0, f64::max)
    };
    let ratio = sup_over(&|t| sp.coefficients(t)) / sup_over(&|t| o2.coefficients(t));
    features.push(FeatureCheck::at_least("standard-vs-averaged-error-ratio", ratio, 5.0));

    Ok((curves, features))
}

fn run_resonant(params: &ScenarioParams) -> Result<(Vec<Curve>, Vec<FeatureCheck>), CoreError> {
    let b = build(Scenario::HarmonicResonant, params)?;
    let ladder = resonant_ladder(&b.problem)?;
    let times = sample_times(b.t_end, b.fastest_frequency, &b.feature_times);
    let mut features = Vec::new();

    // The ladder populations track the full dynamics; its amplitudes carry a
    // phase wobble from discarding the counter-rotating drive half, so the
    // amplitude-level comparison is reported as an informational curve only.
    let traj = oracle::integrate(&b.problem, b.t_end, LONG_RUN_TOL, &times)?;
    let sup_full = sup_error(&traj, |t| ladder.coefficients(t), b.t_end);
    let mut pop_dev = 0.0f64;
    for (idx, &t) in traj.times.iter().enumerate() {
        let w = ladder.poisson_probabilities(t);
        for (ck, wk) in traj.state_at(idx).iter().zip(&w) {
            pop_dev = pop_dev.max((ck.norm_sqr() - wk).abs());
        }
    }
    features.push(FeatureCheck::within("ladder-populations-vs-oracle", pop_dev, 0.0, 1e-3));

    // The ladder solves the co-rotating problem itself to integrator accuracy.
    let rwa = ladder.rwa_problem();
    let rwa_traj = oracle::integrate(&rwa, b.t_end, SWEEP_TOL, &times)?;
    let sup_rwa = sup_error(&rwa_traj, |t| ladder.coefficients(t), b.t_end);
    features.push(FeatureCheck::within("ladder-vs-corotating-oracle", sup_rwa, 0.0, 1e-6));

    // Populations follow the Poisson weights of the mean occupation and stay
    // normalized despite the basis truncation.
    let mut poisson_dev = 0.0f64;
    let mut sum_dev = 0.0f64;
    for &t in times.iter().step_by(257) {
        let c = ladder.coefficients(t);
        let w = ladder.poisson_probabilities(t);
        for (ck, wk) in c.iter().zip(&w) {
            poisson_dev = poisson_dev.max((ck.norm_sqr() - wk).abs());
        }
        sum_dev = sum_dev.max((w.iter().sum::<f64>() - 1.0).abs());
    }
    features.push(FeatureCheck::within("populations-are-poisson", poisson_dev, 0.0, 1e-12));
    features.push(FeatureCheck::within("populations-sum-to-one", sum_dev, 0.0, 1e-12));

    // Mean occupation grows as (eps t)^2 / 8 at exact resonance.
    let want_occ = (params.epsilon * b.t_end).powi(2) / 8.0;
    features.push(FeatureCheck::within(
        "mean-occupation",
        ladder.mean_occupation(b.t_end),
        want_occ,
        1e-9,
    ));

    let curves = vec![curve(
        "ladder-vs-full-oracle",
        vec![CurvePoint { epsilon: params.epsilon, sup_error: sup_full, t_end: b.t_end }],
        None,
    )];
    Ok((curves, features))
}

/// Per-method error magnitudes along the reference trajectory.
#[derive(Clone, Debug)]
pub struct ErrorSeries {
    pub method: String,
    pub errors: Vec<f64>,
}

/// A reference trajectory with per-method error series, for export.
pub struct ErrorReport {
    pub trajectory: Trajectory,
    pub series: Vec<ErrorSeries>,
}

type CoeffFn = Box<dyn Fn(f64) -> Result<Vec<Complex64>, CoreError>>;

fn coefficient_methods(
    scenario: Scenario,
    params: &ScenarioParams,
    b: &ScenarioBuild,
    compare: CompareOptions,
) -> Result<Vec<(String, CoeffFn)>, CoreError> {
    let n = b.problem.dim();
    let mut out: Vec<(String, CoeffFn)> = Vec::new();
    match scenario {
        Scenario::AbruptField | Scenario::HarmonicNonresonant => {
            let profile = b.profile.clone().expect("fast scenario carries a profile");
            let exact = DrivenOscillatorExact::new(&profile)?;
            out.push(("exact".into(), Box::new(move |t| Ok(exact.coefficients(t, n)))));
            let o1 = solve_first_order(&b.problem, params.horizon_constant)?;
            out.push(("order-1".into(), Box::new(move |t| Ok(o1.coefficients(t)))));
            let o2 = solve_second_order(&b.problem, params.horizon_constant)?;
            out.push(("order-2".into(), Box::new(move |t| Ok(o2.coefficients(t)))));
            if compare.standard_pt {
                let sp = standard_pt(&b.problem)?;
                out.push(("standard-pt".into(), Box::new(move |t| Ok(sp.coefficients(t)))));
            }
        }
        Scenario::TwoLevel => {
            let system = two_level_reduce(&b.problem, 0, 1)?;
            out.push(("pair-closed-form".into(), Box::new(move |t| Ok(system.coefficients(t)))));
        }
        Scenario::AdiabaticGaussian => {
            let profile = b.profile.clone().expect("adiabatic scenario carries a profile");
            let exact = SlowDriveExact::new(&profile, params.epsilon, b.t_end)?;
            out.push((
                "exact".into(),
                Box::new(move |t| exact.instantaneous_coefficients(t, n)),
            ));
            let post = post_adiabatic(&b.problem, b.t_end)?;
            out.push(("post-adiabatic".into(), Box::new(move |t| post.coefficients(t))));
            if compare.born_fock {
                let bf = born_fock(&b.problem, b.t_end)?;
                out.push(("born-fock".into(), Box::new(move |t| bf.coefficients(t))));
            }
        }
        Scenario::HarmonicResonant => {
            let ladder = resonant_ladder(&b.problem)?;
            out.push(("ladder".into(), Box::new(move |t| Ok(ladder.coefficients(t)))));
        }
    }
    Ok(out)
}

/// Integrate the scenario's reference trajectory at the primary strength and
/// measure each method's error along it.
pub fn error_series(
    scenario: Scenario,
    params: &ScenarioParams,
    compare: CompareOptions,
) -> Result<ErrorReport, CoreError> {
    let tol = match scenario {
        Scenario::HarmonicResonant => LONG_RUN_TOL,
        _ => SWEEP_TOL,
    };
    error_series_with_tol(scenario, params, compare, tol)
}

/// `error_series` with an explicit oracle tolerance.
pub fn error_series_with_tol(
    scenario: Scenario,
    params: &ScenarioParams,
    compare: CompareOptions,
    tol: f64,
) -> Result<ErrorReport, CoreError> {
    let b = build(scenario, params)?;
    let times = sample_times(b.t_end, b.fastest_frequency, &b.feature_times);
    let trajectory = oracle::integrate(&b.problem, b.t_end, tol, &times)?;
    let methods = coefficient_methods(scenario, params, &b, compare)?;
    let mut series = Vec::new();
    for (method, coeffs) in methods {
        let mut errors = Vec::with_capacity(trajectory.times.len());
        for (t, state) in trajectory.times.iter().zip(&trajectory.states) {
            errors.push(l2_distance(state, &coeffs(*t)?));
        }
        series.push(ErrorSeries { method, errors });
    }
    Ok(ErrorReport { trajectory, series })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for s in Scenario::ALL {
            assert_eq!(s.name().parse::<Scenario>().unwrap(), s);
        }
        assert!(matches!(
            "no-such".parse::<Scenario>(),
            Err(CoreError::UnknownScenario(_))
        ));
    }

    #[test]
    fn defaults_build_for_every_scenario() {
        for s in Scenario::ALL {
            let params = s.default_params();
            let b = build(s, &params).unwrap();
            assert_eq!(b.problem.dim(), params.n_modes);
            assert!(b.t_end > 0.0);
            assert!(b.feature_times.iter().all(|&t| t <= b.t_end * (1.0 + 1e-12)));
        }
    }

    #[test]
    fn two_level_horizon_is_one_exchange_period() {
        let params = Scenario::TwoLevel.default_params();
        let b = build(Scenario::TwoLevel, &params).unwrap();
        // delta0 = 0, g = 1: Delta = 2, period pi / eps.
        assert!((b.t_end - PI / params.epsilon).abs() < 1e-12);
    }

    #[test]
    fn build_at_overrides_the_strength() {
        let params = Scenario::AbruptField.default_params();
        let b = build_at(Scenario::AbruptField, &params, 0.2).unwrap();
        assert_eq!(b.problem.epsilon, 0.2);
        assert!((b.t_end - 5.0).abs() < 1e-12);
    }

    #[test]
    fn curve_fit_gates_on_the_window() {
        let pts: Vec<CurvePoint> = [0.2, 0.1, 0.05]
            .iter()
            .map(|&e| CurvePoint { epsilon: e, sup_error: 3.0 * e * e, t_end: 1.0 / e })
            .collect();
        let c = curve("demo", pts.clone(), Some(ORDER2_WINDOW));
        assert!(c.pass);
        assert!((c.fitted_order.unwrap() - 2.0).abs() < 1e-9);
        let miss = curve("demo", pts.clone(), Some(ORDER1_WINDOW));
        assert!(!miss.pass);
        let info = curve("demo", pts[..1].to_vec(), None);
        assert!(info.pass);
        assert!(info.fitted_order.is_none());
    }

    #[test]
    fn feature_checks_compare_as_labeled() {
        assert!(FeatureCheck::within("w", 1.0, 1.0005, 1e-3).pass);
        assert!(!FeatureCheck::within("w", 1.0, 1.01, 1e-3).pass);
        assert!(!FeatureCheck::within("w", f64::NAN, 0.0, 1e-3).pass);
        assert!(FeatureCheck::at_least("a", 7.0, 5.0).pass);
        assert!(!FeatureCheck::at_least("a", 3.0, 5.0).pass);
    }

    #[test]
    fn level_crossings_interpolate() {
        let times = [0.0, 1.0, 2.0, 3.0, 4.0];
        let vals = [0.0, 1.0, 2.0, 1.0, 0.0];
        let xs = level_crossings(&times, &vals, 0.5);
        assert_eq!(xs.len(), 2);
        assert!((xs[0] - 0.5).abs() < 1e-12);
        assert!((xs[1] - 3.5).abs() < 1e-12);
    }

    #[test]
    fn abrupt_scenario_passes_end_to_end() {
        let params = Scenario::AbruptField.default_params();
        let report = run_scenario(Scenario::AbruptField, &params).unwrap();
        for c in &report.curves {
            assert!(c.pass, "curve {} failed: {:?}", c.name, c.fitted_order);
        }
        for f in &report.features {
            assert!(f.pass, "feature {} failed: value {} expected {}", f.name, f.value, f.expected);
        }
    }

    #[test]
    fn error_series_covers_every_method() {
        let params = Scenario::AbruptField.default_params();
        let report =
            error_series(Scenario::AbruptField, &params, CompareOptions::default()).unwrap();
        assert_eq!(report.series.len(), 3);
        let exact = &report.series[0];
        assert_eq!(exact.method, "exact");
        let worst = exact.errors.iter().copied().fold(0.0, f64::max);
        assert!(worst < 1e-8, "oracle-vs-exact drifted to {worst}");
        assert_eq!(report.trajectory.times.len(), exact.errors.len());
    }
}

//! Canonical averaging for discrete-spectrum mode-amplitude dynamics:
//! averaged solvers with secular frequency shifts, closed-form references,
//! adiabatic expansions, and a brute-force integrator to check them all.

pub mod adiabatic;
pub mod averaging;
pub mod drive;
pub mod error;
pub mod exact;
pub mod hermite;
pub mod ladder;
pub mod matrix;
pub mod model;
pub mod oracle;
pub mod quad;
pub mod scenario;
pub mod stats;
pub mod sweep;
pub mod trig;
pub mod two_level;

pub use adiabatic::{born_fock, instantaneous_shifts, post_adiabatic};
pub use averaging::{
    averaged_hamiltonians, frequency_shifts, solve_first_order, solve_second_order, standard_pt,
    ApproxSolution, AveragedHamiltonians,
};
pub use drive::{
    displacement_coupling, oscillator_spectrum, position_matrix, velocity_coupling, DriveKind,
    DriveProfile,
};
pub use error::CoreError;
pub use exact::{truncated_expansion, DrivenOscillatorExact, SlowDriveExact};
pub use hermite::{gauss_hermite, gh_integrate, HermiteBasis};
pub use ladder::{resonant_ladder, ResonantLadder};
pub use matrix::{CMat, HarmonicMatrix};
pub use model::{
    detect_resonances, from_action_angle, to_action_angle, ActionAngleState, CouplingModel,
    PerturbationProblem, PhaseConvention, Resonance, SpectrumModel,
};
pub use oracle::{integrate, l2_distance, sample_times, sup_error, Trajectory};
pub use quad::CumulativeIntegral;
pub use scenario::{
    build, build_at, error_series, error_series_with_tol, run_scenario, run_scenario_with,
    CheckKind, CompareOptions, Curve, CurvePoint, ErrorReport, ErrorSeries, FeatureCheck,
    Scenario, ScenarioBuild, ScenarioParams, ScenarioReport,
};
pub use stats::{fit_order, linear_fit, unwrap_phase};
pub use sweep::{run_sweep, run_sweep_sequential};
pub use trig::{TrigSum, TrigTerm};
pub use two_level::{two_level_reduce, TwoLevelSystem};

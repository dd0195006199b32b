//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("coupling is not Hermitian at entry ({m},{n}): deviation {deviation:.3e}")]
    NotHermitian { m: usize, n: usize, deviation: f64 },

    #[error("epsilon must lie in (0, 1), got {0}")]
    InvalidEpsilon(f64),

    #[error("initial state norm deviates from 1 by {0:.3e}")]
    NotNormalized(f64),

    #[error(
        "averaged coupling has a DC off-diagonal entry ({m},{n}) of magnitude {magnitude:.3e}: \
         the pair is resonant; route it through the two-level reduction or the resonant ladder"
    )]
    ResonantDc { m: usize, n: usize, magnitude: f64 },

    #[error("matrix is not diagonal: entry ({m},{n}) has magnitude {magnitude:.3e}")]
    NotDiagonal { m: usize, n: usize, magnitude: f64 },

    #[error("pair is not coupled")]
    NotCoupled,

    #[error("coupling is not a nearest-neighbour ladder: offending entry ({m},{n})")]
    LadderStructure { m: usize, n: usize },

    #[error("levels {m} and {n} cross near tau = {tau:.6}: |Omega_mn| <= {gap:.3e}")]
    LevelCrossing { m: usize, n: usize, tau: f64, gap: f64 },

    #[error("quadrature failed to reach tolerance {requested:.3e}; achieved {achieved:.3e}")]
    QuadratureFailure { requested: f64, achieved: f64 },

    #[error("integrator step size underflowed at t = {t:.6}")]
    StepUnderflow { t: f64 },

    #[error("norm drift {drift:.3e} exceeds 1e-6: the integration is not trustworthy")]
    NormDrift { drift: f64 },

    #[error("slope fit needs at least 3 strictly positive errors over distinct epsilons")]
    DegenerateFit,

    #[error("operation requires a stationary (constant or trig) coupling")]
    RequiresStationaryCoupling,

    #[error("operation requires a slow (adiabatic) coupling")]
    RequiresSlowCoupling,

    #[error("drive profile {0} has no closed-form expansion here")]
    NoClosedForm(String),

    #[error("soft-switch violation: |xi(0)| + |xi'(0)| = {value:.3e} exceeds 1e-8")]
    SoftSwitch { value: f64 },

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("matrix element scenario `{0}` is not recognized")]
    UnknownMatrixElements(String),

    #[error("config error: {0}")]
    Config(String),
}

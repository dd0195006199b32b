//! Non-perturbative treatment of a resonant pair of modes. When one coupling
//! entry keeps a slow component, averaging fails; the pair instead evolves
//! under an effective 2x2 Hamiltonian in slow time, solved here in closed
//! form, while remaining modes are spectators.

use num_complex::Complex64;

use crate::error::CoreError;
use crate::model::{PerturbationProblem, RHO_RES};

/// Couplings below this are treated as absent.
pub const COUPLING_FLOOR: f64 = 1e-12;

/// A resonant pair reduced to its slow 2x2 normal form
/// d/dtau cb_a = -i g cb_b e^{+i delta tau},
/// d/dtau cb_b = -i conj(g) cb_a e^{-i delta tau}.
#[derive(Clone, Debug)]
pub struct TwoLevelSystem {
    pub alpha: usize,
    pub beta: usize,
    /// Slow component of the (alpha, beta) coupling entry.
    pub g: Complex64,
    /// Its residual frequency in slow-time units.
    pub delta0: f64,
    /// Diagonal coupling means.
    pub v_aa: f64,
    pub v_bb: f64,
    /// Effective detuning delta0 + v_aa - v_bb.
    pub delta: f64,
    /// Flopping rate sqrt(delta^2 + 4 |g|^2).
    pub big_delta: f64,
    pub epsilon: f64,
    initial: Vec<Complex64>,
    frame_omega: Vec<f64>,
}

/// Extract the slow 2x2 normal form for modes `alpha`, `beta`. Fast coupling
/// components are discarded; a pair with no slow coupling is `NotCoupled`.
pub fn two_level_reduce(
    problem: &PerturbationProblem,
    alpha: usize,
    beta: usize,
) -> Result<TwoLevelSystem, CoreError> {
    assert!(alpha != beta, "a pair needs two distinct modes");
    let w = problem.build_h1()?;
    let epsilon = problem.epsilon;
    let rho_dc = RHO_RES * epsilon;
    let slow: Vec<_> = w
        .get(alpha, beta)
        .terms()
        .iter()
        .filter(|t| t.frequency.abs() <= rho_dc)
        .cloned()
        .collect();
    let (g, nu_slow) = match slow.as_slice() {
        [] => (Complex64::new(0.0, 0.0), 0.0),
        [t] => (t.amplitude, t.frequency),
        _ => {
            return Err(CoreError::NoClosedForm(
                "pair carries several slow coupling components".into(),
            ))
        }
    };
    if g.norm() <= COUPLING_FLOOR {
        return Err(CoreError::NotCoupled);
    }
    let v_aa = w.get(alpha, alpha).average(rho_dc).re;
    let v_bb = w.get(beta, beta).average(rho_dc).re;
    let delta0 = nu_slow / epsilon;
    let delta = delta0 + v_aa - v_bb;
    let big_delta = (delta * delta + 4.0 * g.norm_sqr()).sqrt();
    Ok(TwoLevelSystem {
        alpha,
        beta,
        g,
        delta0,
        v_aa,
        v_bb,
        delta,
        big_delta,
        epsilon,
        initial: problem.initial.clone(),
        frame_omega: problem.frame_omega(),
    })
}

impl TwoLevelSystem {
    /// Slow-frame amplitudes (cb_a, cb_b) at slow time tau, from the exact
    /// 2x2 propagator.
    pub fn slow_amplitudes(&self, tau: f64) -> (Complex64, Complex64) {
        let i = Complex64::i();
        let (d, dd) = (self.delta, self.big_delta);
        let half = 0.5 * dd * tau;
        let (cos, sin) = (half.cos(), half.sin());
        let u0 = self.initial[self.alpha];
        let w0 = self.initial[self.beta];
        let u = (cos - i * (d / dd) * sin) * u0 - i * (2.0 * self.g / dd) * sin * w0;
        let w = -i * (2.0 * self.g.conj() / dd) * sin * u0 + (cos + i * (d / dd) * sin) * w0;
        let rot = Complex64::new(0.0, 0.5 * d * tau).exp();
        (rot * u, w / rot)
    }

    /// Interaction-frame amplitudes of the pair at fast time t.
    pub fn pair_coefficients(&self, t: f64) -> (Complex64, Complex64) {
        let tau = self.epsilon * t;
        let (cb_a, cb_b) = self.slow_amplitudes(tau);
        let c_a = cb_a * Complex64::new(0.0, -self.v_aa * tau).exp();
        let c_b = cb_b * Complex64::new(0.0, -self.v_bb * tau).exp();
        (c_a, c_b)
    }

    /// All interaction-frame amplitudes; spectator modes stay frozen.
    pub fn coefficients(&self, t: f64) -> Vec<Complex64> {
        let mut out = self.initial.clone();
        let (c_a, c_b) = self.pair_coefficients(t);
        out[self.alpha] = c_a;
        out[self.beta] = c_b;
        out
    }

    /// Fast-time period after which the pair returns to its initial
    /// populations: 2 pi / (big_delta eps).
    pub fn period(&self) -> f64 {
        2.0 * std::f64::consts::PI / (self.big_delta * self.epsilon)
    }

    /// The pair's dressed lab-frame frequencies. For a degenerate pair these
    /// are omega0 + eps ((v_aa + v_bb)/2 +- big_delta/2).
    pub fn renormalized_frequencies(&self) -> (f64, f64) {
        let base = self.frame_omega[self.alpha] + self.epsilon * self.v_aa;
        let omega1 = 0.5 * (self.delta + self.big_delta);
        let omega2 = 0.5 * (self.delta - self.big_delta);
        (base - self.epsilon * omega2, base - self.epsilon * omega1)
    }
}

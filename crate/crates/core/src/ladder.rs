//! Near-resonant cosine drive on a uniform ladder of modes. Averaging fails
//! (every neighbor pair keeps a slow coupling component), but the rotating
//! frame turns the slow flow into a statically displaced ladder, which stays
//! a coherent state: populations climb the ladder as a Poisson distribution.

use num_complex::Complex64;

use crate::error::CoreError;
use crate::model::{CouplingModel, PerturbationProblem, SpectrumModel};
use crate::trig::{TrigSum, TrigTerm};

/// Ladder recognition tolerance for spacings and amplitude patterns.
pub const LADDER_TOL: f64 = 1e-9;

fn i_unit() -> Complex64 {
    Complex64::new(0.0, 1.0)
}

/// A uniform ladder under a near-resonant cosine drive, reduced to closed
/// form in the co-rotating frame.
#[derive(Clone, Debug)]
pub struct ResonantLadder {
    /// Problem strength: the drive is eps1 * xi_amp * cos(nu t) * x.
    pub eps1: f64,
    /// Drive amplitude relative to the problem strength (usually 1).
    pub xi_amp: f64,
    /// Drive frequency.
    pub nu: f64,
    /// Ladder spacing.
    pub spacing: f64,
    /// Detuning nu - spacing.
    pub detune: f64,
    /// Effective static displacement eps1 * xi_amp / 2.
    pub xi_eff: f64,
    pub n_modes: usize,
    spectrum: SpectrumModel,
    initial: Vec<Complex64>,
}

/// Recognize the ladder form and reduce it. Requirements: uniform spacing,
/// nearest-neighbor cosine coupling with the ladder amplitude pattern
/// -xi_amp sqrt((k+1)/2) at one common frequency, ground-state start.
pub fn resonant_ladder(problem: &PerturbationProblem) -> Result<ResonantLadder, CoreError> {
    problem.validate()?;
    let n = problem.dim();
    assert!(n >= 2, "a ladder needs at least two modes");
    let omega = &problem.spectrum.omega0;
    let spacing = omega[1] - omega[0];
    for k in 1..n - 1 {
        if ((omega[k + 1] - omega[k]) - spacing).abs() > LADDER_TOL {
            return Err(CoreError::LadderStructure { m: k, n: k + 1 });
        }
    }
    let v = match &problem.coupling {
        CouplingModel::Trig(v) => v,
        _ => return Err(CoreError::LadderStructure { m: 0, n: 0 }),
    };
    for r in 0..n {
        for c in 0..n {
            if r.abs_diff(c) != 1 && !v[r][c].is_zero() {
                return Err(CoreError::LadderStructure { m: r, n: c });
            }
        }
    }
    // Extract the common frequency and relative amplitude from the (0, 1)
    // entry: -xi_amp x_{01} cos(nu t) splits into conjugate half-amplitudes.
    let x01 = (0.5f64).sqrt();
    let (nu, xi_amp) = match v[0][1].terms() {
        [a, b] if (a.frequency + b.frequency).abs() < LADDER_TOL
            && a.amplitude.im.abs() < LADDER_TOL
            && (a.amplitude - b.amplitude).norm() < LADDER_TOL =>
        {
            (b.frequency.abs(), -2.0 * a.amplitude.re / x01)
        }
        _ => return Err(CoreError::LadderStructure { m: 0, n: 1 }),
    };
    for k in 0..n - 1 {
        let xk = ((k + 1) as f64 / 2.0).sqrt();
        let expect = TrigSum::cosine(-xi_amp * xk, nu);
        if v[k][k + 1].sub(&expect).max_amplitude() > LADDER_TOL
            || v[k + 1][k].sub(&expect).max_amplitude() > LADDER_TOL
        {
            return Err(CoreError::LadderStructure { m: k, n: k + 1 });
        }
    }
    if (problem.initial[0] - 1.0).norm() > 1e-12 {
        return Err(CoreError::Config("the ladder closed form needs a ground start".into()));
    }
    let eps1 = problem.epsilon;
    Ok(ResonantLadder {
        eps1,
        xi_amp,
        nu,
        spacing,
        detune: nu - spacing,
        xi_eff: eps1 * xi_amp / 2.0,
        n_modes: n,
        spectrum: problem.spectrum.clone(),
        initial: problem.initial.clone(),
    })
}

impl ResonantLadder {
    /// Coherent displacement in the rotating frame:
    /// alpha(t) = (xi_eff / (sqrt2 eps_d)) (e^{i eps_d t} - 1), with the
    /// eps_d -> 0 limit i xi_eff t / sqrt2.
    pub fn alpha(&self, t: f64) -> Complex64 {
        let ed = self.detune;
        let pref = self.xi_eff / 2f64.sqrt();
        if ed.abs() < 1e-12 {
            i_unit() * (pref * t)
        } else {
            (Complex64::new(0.0, ed * t).exp() - 1.0) * (pref / ed)
        }
    }

    /// ln c_0(t) = i (xi_eff / sqrt2) int_0^t alpha(z) dz, closed form.
    pub fn log_c0(&self, t: f64) -> Complex64 {
        let ed = self.detune;
        let pref = self.xi_eff / 2f64.sqrt();
        if ed.abs() < 1e-12 {
            // int alpha = i pref t^2 / 2.
            Complex64::new(-pref * pref * t * t / 2.0, 0.0)
        } else {
            let int_alpha = ((Complex64::new(0.0, ed * t).exp() - 1.0) / (i_unit() * ed) - t)
                * (pref / ed);
            i_unit() * pref * int_alpha
        }
    }

    /// Interaction-frame amplitudes c_k = c_0 (alpha e^{-i eps_d t})^k / sqrt(k!).
    pub fn coefficients(&self, t: f64) -> Vec<Complex64> {
        let ratio = self.alpha(t) * Complex64::new(0.0, -self.detune * t).exp();
        let mut term = self.log_c0(t).exp();
        let mut out = Vec::with_capacity(self.n_modes);
        for k in 0..self.n_modes {
            if k > 0 {
                term *= ratio / (k as f64).sqrt();
            }
            out.push(term);
        }
        out
    }

    /// Mean ladder occupation |alpha|^2; at exact resonance eps1^2 t^2 / 8
    /// for a unit-amplitude drive.
    pub fn mean_occupation(&self, t: f64) -> f64 {
        self.alpha(t).norm_sqr()
    }

    /// Poisson weights w_k = nbar^k e^{-nbar} / k! the populations follow.
    pub fn poisson_probabilities(&self, t: f64) -> Vec<f64> {
        let nbar = self.mean_occupation(t);
        let mut w = (-nbar).exp();
        (0..self.n_modes)
            .map(|k| {
                if k > 0 {
                    w *= nbar / k as f64;
                }
                w
            })
            .collect()
    }

    /// The co-rotating-half problem this closed form solves exactly: each
    /// cosine keeps only the half that beats slowly against the ladder.
    pub fn rwa_problem(&self) -> PerturbationProblem {
        let n = self.n_modes;
        let mut v = vec![vec![TrigSum::zero(); n]; n];
        for k in 0..n - 1 {
            let amp = -self.xi_amp * ((k + 1) as f64 / 2.0).sqrt() / 2.0;
            v[k][k + 1] = TrigSum::new(vec![TrigTerm {
                amplitude: Complex64::new(amp, 0.0),
                frequency: self.nu,
            }]);
            v[k + 1][k] = TrigSum::new(vec![TrigTerm {
                amplitude: Complex64::new(amp, 0.0),
                frequency: -self.nu,
            }]);
        }
        PerturbationProblem::new(
            self.spectrum.clone(),
            CouplingModel::Trig(v),
            self.eps1,
            self.initial.clone(),
        )
        .expect("the reduced ladder is a valid problem")
    }
}

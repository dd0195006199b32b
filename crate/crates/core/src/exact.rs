//! Exact evolution of a displaced harmonic well started in the ground state.
//! The state stays a coherent state: one quadrature
//! delta(t) = -(i/sqrt2) int_0^t xi(z) e^{iz} dz fixes all amplitudes, and a
//! second one fixes the overall phase. Trigonometric drives get closed forms;
//! slow pulses fall back to cached numerical quadrature.

use std::cell::RefCell;
use std::rc::Rc;

use num_complex::Complex64;

use crate::drive::{DriveKind, DriveProfile};
use crate::error::CoreError;
use crate::quad::CumulativeIntegral;
use crate::trig::{TrigSum, TrigTerm};

fn i_unit() -> Complex64 {
    Complex64::new(0.0, 1.0)
}

/// Projections of the coherent state onto eigenfunctions of the well shifted
/// by `s`, without frame phases: entry k is
/// `c0 e^{-it/2} (2^k k!)^{-1/2} b^k exp(b^2/4 - s^2/2 + sqrt2 gamma s - gamma^2/2)`
/// with b = sqrt2 gamma - s.
pub fn projection_raws(
    c0: Complex64,
    gamma: Complex64,
    s: f64,
    t: f64,
    n_modes: usize,
) -> Vec<Complex64> {
    let rt2 = 2f64.sqrt();
    let b = gamma * rt2 - s;
    let expo = b * b * 0.25 - s * s * 0.5 + gamma * (rt2 * s) - gamma * gamma * 0.5;
    let mut term = c0 * Complex64::new(0.0, -0.5 * t).exp() * expo.exp();
    let mut out = Vec::with_capacity(n_modes);
    for k in 0..n_modes {
        if k > 0 {
            term *= b / (2.0 * k as f64).sqrt();
        }
        out.push(term);
    }
    out
}

/// The coherent state in position representation:
/// `c0 e^{-it/2} pi^{-1/4} exp(-x^2/2 + sqrt2 gamma x - gamma^2/2)`.
pub fn wavefunction_value(c0: Complex64, gamma: Complex64, t: f64, x: f64) -> Complex64 {
    let expo = gamma * (2f64.sqrt() * x) - gamma * gamma * 0.5 - x * x * 0.5;
    c0 * Complex64::new(0.0, -0.5 * t).exp() * expo.exp() * std::f64::consts::PI.powf(-0.25)
}

/// Dress raw shifted projections with instantaneous frame phases
/// `exp(i ((k + 1/2) t - (1/2) int_0^t xi^2))`.
fn dress_with_frame(raws: Vec<Complex64>, t: f64, xi_sq_integral: f64) -> Vec<Complex64> {
    raws.into_iter()
        .enumerate()
        .map(|(k, r)| r * Complex64::new(0.0, (k as f64 + 0.5) * t - 0.5 * xi_sq_integral).exp())
        .collect()
}

enum DeltaForm {
    /// delta and the phase integrand delta^2 e^{-2it} are trig sums.
    Trig { delta: TrigSum, phase: TrigSum },
    /// Resonant cosine drive at nu = 1: secular terms, handled explicitly.
    ResonantCos,
}

/// Closed-form solution for a trigonometric displacement drive.
pub struct DrivenOscillatorExact {
    pub profile: DriveProfile,
    xi_sq: TrigSum,
    form: DeltaForm,
}

impl DrivenOscillatorExact {
    pub fn new(profile: &DriveProfile) -> Result<Self, CoreError> {
        let rt2 = 2f64.sqrt();
        let e1 = profile.eps1;
        let xi = profile.as_trig()?;
        let xi_sq = xi.mul(&xi);
        let form = match profile.kind {
            DriveKind::AbruptConstant => {
                let a = e1 / rt2;
                let delta = TrigSum::new(vec![
                    TrigTerm { amplitude: Complex64::new(-a, 0.0), frequency: 1.0 },
                    TrigTerm { amplitude: Complex64::new(a, 0.0), frequency: 0.0 },
                ]);
                let phase = delta.mul(&delta).shift_frequency(-2.0);
                DeltaForm::Trig { delta, phase }
            }
            DriveKind::Sinusoidal { nu } => {
                if (nu.abs() - 1.0).abs() < 1e-9 {
                    return Err(CoreError::NoClosedForm(
                        "resonant sine drive; use the cosine form".into(),
                    ));
                }
                let a = -i_unit() * e1 / (rt2 * (nu * nu - 1.0));
                let delta = TrigSum::new(vec![
                    TrigTerm { amplitude: a * (0.5 * (1.0 - nu)), frequency: 1.0 + nu },
                    TrigTerm { amplitude: -a * (0.5 * (1.0 + nu)), frequency: 1.0 - nu },
                    TrigTerm { amplitude: a * nu, frequency: 0.0 },
                ]);
                let phase = delta.mul(&delta).shift_frequency(-2.0);
                DeltaForm::Trig { delta, phase }
            }
            DriveKind::ResonantCosine { nu } => {
                if (nu - 1.0).abs() < 1e-12 {
                    DeltaForm::ResonantCos
                } else {
                    let b = -e1 / (2.0 * rt2);
                    let delta = TrigSum::new(vec![
                        TrigTerm {
                            amplitude: Complex64::new(b / (1.0 + nu), 0.0),
                            frequency: 1.0 + nu,
                        },
                        TrigTerm {
                            amplitude: Complex64::new(b / (1.0 - nu), 0.0),
                            frequency: 1.0 - nu,
                        },
                        TrigTerm {
                            amplitude: Complex64::new(-2.0 * b / (1.0 - nu * nu), 0.0),
                            frequency: 0.0,
                        },
                    ]);
                    let phase = delta.mul(&delta).shift_frequency(-2.0);
                    DeltaForm::Trig { delta, phase }
                }
            }
            DriveKind::GaussianPulse { .. } | DriveKind::Custom { .. } => {
                return Err(CoreError::NoClosedForm(
                    "slow pulses are handled by SlowDriveExact".into(),
                ))
            }
        };
        Ok(DrivenOscillatorExact { profile: profile.clone(), xi_sq, form })
    }

    /// The coherent-state displacement integral.
    pub fn delta(&self, t: f64) -> Complex64 {
        match &self.form {
            DeltaForm::Trig { delta, .. } => delta.eval(t),
            DeltaForm::ResonantCos => {
                let e1 = self.profile.eps1;
                -i_unit() * (e1 / (2.0 * 2f64.sqrt()))
                    * ((i_unit() * t).exp() * t.sin() + t)
            }
        }
    }

    /// delta as a trig sum when it has one (not at exact resonance).
    pub fn delta_trig(&self) -> Option<&TrigSum> {
        match &self.form {
            DeltaForm::Trig { delta, .. } => Some(delta),
            DeltaForm::ResonantCos => None,
        }
    }

    /// ln c_0(t) = i int_0^t delta^2 e^{-2iz} dz + delta(t)^2 e^{-2it} / 2.
    pub fn log_c0(&self, t: f64) -> Complex64 {
        let d = self.delta(t);
        let boundary = d * d * (-i_unit() * (2.0 * t)).exp() * 0.5;
        let phi = match &self.form {
            DeltaForm::Trig { phase, .. } => i_unit() * phase.integral_from_zero(t),
            DeltaForm::ResonantCos => {
                let e1 = self.profile.eps1;
                let secular = 0.5 * t - 0.25 * (2.0 * t).sin();
                let mixed = (-i_unit() * t).exp() * (t * t * t.sin());
                -i_unit() * (e1 * e1 / 8.0) * (secular + mixed)
            }
        };
        phi + boundary
    }

    pub fn c0(&self, t: f64) -> Complex64 {
        self.log_c0(t).exp()
    }

    /// Coherent-state label gamma(t) = -delta(t) e^{-it}.
    pub fn coherent(&self, t: f64) -> Complex64 {
        -self.delta(t) * (-i_unit() * t).exp()
    }

    /// Mode amplitudes in the undisplaced frame: c_k = (-delta)^k / sqrt(k!) c_0.
    pub fn coefficients(&self, t: f64, n_modes: usize) -> Vec<Complex64> {
        let d = self.delta(t);
        let mut term = self.c0(t);
        let mut out = Vec::with_capacity(n_modes);
        for k in 0..n_modes {
            if k > 0 {
                term *= -d / (k as f64).sqrt();
            }
            out.push(term);
        }
        out
    }

    /// |c_0|^2 = exp(-|delta|^2).
    pub fn ground_population(&self, t: f64) -> f64 {
        (-self.delta(t).norm_sqr()).exp()
    }

    /// Amplitudes in the instantaneous (displaced) eigenbasis, with frame
    /// phases built from the true instantaneous energies k + 1/2 - xi^2/2.
    pub fn shifted_coefficients(&self, t: f64, n_modes: usize) -> Vec<Complex64> {
        let s = self.profile.xi(t);
        let raws = projection_raws(self.c0(t), self.coherent(t), s, t, n_modes);
        let ixi2 = self.xi_sq.integral_from_zero(t).re;
        dress_with_frame(raws, t, ixi2)
    }
}

type CumF = CumulativeIntegral<Box<dyn FnMut(f64) -> Complex64>>;

/// Exact solution for a slow displacement pulse xi(eps t): the same coherent
/// state, with delta and the phase integral evaluated by cached quadrature.
pub struct SlowDriveExact {
    pub profile: DriveProfile,
    pub epsilon: f64,
    delta: Rc<RefCell<CumF>>,
    phase: RefCell<CumF>,
    xi_sq: RefCell<CumF>,
    theta: RefCell<CumF>,
}

impl SlowDriveExact {
    pub fn new(profile: &DriveProfile, epsilon: f64, t_end: f64) -> Result<Self, CoreError> {
        if !profile.is_slow() {
            return Err(CoreError::RequiresSlowCoupling);
        }
        profile.validate()?;
        let rt2 = 2f64.sqrt();

        let p = profile.clone();
        let delta_f: Box<dyn FnMut(f64) -> Complex64> = Box::new(move |z| {
            -i_unit() / rt2 * p.xi(epsilon * z) * (i_unit() * z).exp()
        });
        let delta = Rc::new(RefCell::new(CumulativeIntegral::new(delta_f, t_end, 1.5, 1e-11)?));

        let delta_for_phase = Rc::clone(&delta);
        let phase_f: Box<dyn FnMut(f64) -> Complex64> = Box::new(move |z| {
            let d = delta_for_phase.borrow_mut().eval(z).expect("delta quadrature");
            d * d * (-i_unit() * (2.0 * z)).exp()
        });
        let phase = RefCell::new(CumulativeIntegral::new(phase_f, t_end, 0.75, 1e-11)?);

        let p = profile.clone();
        let xi_sq_f: Box<dyn FnMut(f64) -> Complex64> = Box::new(move |z| {
            let v = p.xi(epsilon * z);
            Complex64::new(v * v, 0.0)
        });
        let xi_sq = RefCell::new(CumulativeIntegral::new(xi_sq_f, t_end, 2.0, 1e-11)?);

        let p = profile.clone();
        let theta_f: Box<dyn FnMut(f64) -> Complex64> = Box::new(move |z| {
            let xid = epsilon * p.dxi_dtau(epsilon * z);
            Complex64::new(0.5 * xid * xid, 0.0)
        });
        let theta = RefCell::new(CumulativeIntegral::new(theta_f, t_end, 2.0, 1e-12)?);

        Ok(SlowDriveExact { profile: profile.clone(), epsilon, delta, phase, xi_sq, theta })
    }

    pub fn delta(&self, t: f64) -> Result<Complex64, CoreError> {
        self.delta.borrow_mut().eval(t)
    }

    pub fn log_c0(&self, t: f64) -> Result<Complex64, CoreError> {
        let d = self.delta(t)?;
        let boundary = d * d * (-i_unit() * (2.0 * t)).exp() * 0.5;
        let phi = i_unit() * self.phase.borrow_mut().eval(t)?;
        Ok(phi + boundary)
    }

    pub fn c0(&self, t: f64) -> Result<Complex64, CoreError> {
        Ok(self.log_c0(t)?.exp())
    }

    /// Amplitudes in the instantaneous eigenbasis of the displaced well,
    /// frame phases from the true instantaneous energies k + 1/2 - xi^2/2.
    pub fn instantaneous_coefficients(
        &self,
        t: f64,
        n_modes: usize,
    ) -> Result<Vec<Complex64>, CoreError> {
        let d = self.delta(t)?;
        let gamma = -d * (-i_unit() * t).exp();
        let s = self.profile.xi(self.epsilon * t);
        let raws = projection_raws(self.c0(t)?, gamma, s, t, n_modes);
        let ixi2 = self.xi_sq.borrow_mut().eval(t)?.re;
        Ok(dress_with_frame(raws, t, ixi2))
    }

    /// Theta(t) = int_0^t xi_dot^2 / 2 dz by direct quadrature of the drive
    /// velocity (independent of any coupling-matrix assembly).
    pub fn theta(&self, t: f64) -> Result<f64, CoreError> {
        Ok(self.theta.borrow_mut().eval(t)?.re)
    }
}

/// First-order truncation of the exact solution, keeping secular phases
/// intact: the form a perturbative solver should reproduce. Fast drives
/// ignore `epsilon` (their amplitude is the profile's); slow drives use it
/// for the fast-time velocity and return instantaneous-basis amplitudes.
pub fn truncated_expansion(
    profile: &DriveProfile,
    epsilon: f64,
    t: f64,
    n_modes: usize,
) -> Result<Vec<Complex64>, CoreError> {
    let e1 = profile.eps1;
    let rt2 = 2f64.sqrt();
    let mut out = vec![Complex64::new(0.0, 0.0); n_modes];
    match profile.kind {
        DriveKind::AbruptConstant => {
            let secular = Complex64::new(0.0, e1 * e1 * t / 2.0).exp();
            out[0] = secular;
            if n_modes > 1 {
                out[1] = secular * ((i_unit() * t).exp() - 1.0) * (e1 / rt2);
            }
        }
        DriveKind::Sinusoidal { nu } => {
            let exact = DrivenOscillatorExact::new(profile)?;
            let sigma = e1 * e1 / (4.0 * (nu * nu - 1.0));
            let secular = Complex64::new(0.0, -sigma * t).exp();
            out[0] = secular;
            if n_modes > 1 {
                out[1] = -exact.delta(t) * secular;
            }
        }
        DriveKind::ResonantCosine { nu } => {
            if (nu - 1.0).abs() > 1e-12 {
                return Err(CoreError::NoClosedForm(
                    "truncated resonant form needs exact resonance".into(),
                ));
            }
            let mut term = Complex64::new((-e1 * e1 * t * t / 16.0).exp(), 0.0);
            let step = i_unit() * (e1 * t / (2.0 * rt2));
            for (k, slot) in out.iter_mut().enumerate() {
                if k > 0 {
                    term *= step / (k as f64).sqrt();
                }
                *slot = term;
            }
        }
        DriveKind::GaussianPulse { .. } | DriveKind::Custom { .. } => {
            profile.validate()?;
            let theta = crate::quad::integrate(
                |z| {
                    let xid = epsilon * profile.dxi_dtau(epsilon * z);
                    0.5 * xid * xid
                },
                0.0,
                t,
                1e-12,
            )?;
            let secular = Complex64::new(0.0, theta).exp();
            out[0] = secular;
            if n_modes > 1 {
                let xid = epsilon * profile.dxi_dtau(epsilon * t);
                out[1] = secular * (i_unit() * t).exp() * i_unit() * (xid / rt2);
            }
        }
    }
    Ok(out)
}

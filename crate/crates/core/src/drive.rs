//! Drive profiles for the driven-oscillator scenarios and the coupling
//! matrices they induce. Convention: the perturbation is -xi(t) * x, so a
//! positive drive displaces the well toward positive x.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::CoreError;
use crate::matrix::CMat;
use crate::model::CouplingModel;
use crate::trig::TrigSum;

/// A slow drive must start this close to zero, in value and slope, relative
/// to its amplitude, or the adiabatic treatment does not apply.
pub const SOFT_SWITCH_TOL: f64 = 1e-8;

/// Time dependence of the displacement drive.
#[derive(Clone)]
pub enum DriveKind {
    /// xi(t) = eps1 for t >= 0, switched on abruptly.
    AbruptConstant,
    /// xi(t) = eps1 sin(nu t); vanishes at switch-on.
    Sinusoidal { nu: f64 },
    /// xi(t) = eps1 cos(nu t); abrupt at switch-on, resonant when nu = 1.
    ResonantCosine { nu: f64 },
    /// xi(tau) = eps1 exp(-(tau - tau0)^2 / width^2) in slow time tau.
    GaussianPulse { tau0: f64, width: f64 },
    /// User-supplied slow shape f(tau) and its derivative, so that
    /// xi(tau) = eps1 f(tau). `soft_switch` asserts f(0) = f'(0) = 0;
    /// validate() refuses the profile unless the flag holds and a numeric
    /// spot check at tau = 0 agrees.
    Custom {
        shape: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        shape_dot: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        soft_switch: bool,
    },
}

impl fmt::Debug for DriveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DriveKind::AbruptConstant => write!(f, "AbruptConstant"),
            DriveKind::Sinusoidal { nu } => write!(f, "Sinusoidal {{ nu: {nu} }}"),
            DriveKind::ResonantCosine { nu } => write!(f, "ResonantCosine {{ nu: {nu} }}"),
            DriveKind::GaussianPulse { tau0, width } => {
                write!(f, "GaussianPulse {{ tau0: {tau0}, width: {width} }}")
            }
            DriveKind::Custom { soft_switch, .. } => {
                write!(f, "Custom {{ soft_switch: {soft_switch} }}")
            }
        }
    }
}

/// Displacement drive with amplitude `eps1`.
#[derive(Clone, Debug)]
pub struct DriveProfile {
    pub kind: DriveKind,
    pub eps1: f64,
}

impl DriveProfile {
    pub fn new(kind: DriveKind, eps1: f64) -> Self {
        DriveProfile { kind, eps1 }
    }

    /// True when the drive is parametrized by slow time.
    pub fn is_slow(&self) -> bool {
        matches!(self.kind, DriveKind::GaussianPulse { .. } | DriveKind::Custom { .. })
    }

    /// Displacement value; the argument is fast time for fast drives and
    /// slow time for slow ones.
    pub fn xi(&self, t: f64) -> f64 {
        match &self.kind {
            DriveKind::AbruptConstant => self.eps1,
            DriveKind::Sinusoidal { nu } => self.eps1 * (nu * t).sin(),
            DriveKind::ResonantCosine { nu } => self.eps1 * (nu * t).cos(),
            DriveKind::GaussianPulse { tau0, width } => {
                self.eps1 * (-((t - tau0) / width).powi(2)).exp()
            }
            DriveKind::Custom { shape, .. } => self.eps1 * shape(t),
        }
    }

    /// Slow-time derivative d(xi)/d(tau); slow drives only.
    pub fn dxi_dtau(&self, tau: f64) -> f64 {
        match &self.kind {
            DriveKind::GaussianPulse { tau0, width } => {
                -2.0 * (tau - tau0) / (width * width) * self.xi(tau)
            }
            DriveKind::Custom { shape_dot, .. } => self.eps1 * shape_dot(tau),
            _ => panic!("dxi_dtau is defined for slow drives only"),
        }
    }

    /// The displacement as a trigonometric sum, when it has one.
    pub fn as_trig(&self) -> Result<TrigSum, CoreError> {
        match self.kind {
            DriveKind::AbruptConstant => {
                Ok(TrigSum::constant(Complex64::new(self.eps1, 0.0)))
            }
            DriveKind::Sinusoidal { nu } => Ok(TrigSum::sinusoid(self.eps1, nu)),
            DriveKind::ResonantCosine { nu } => Ok(TrigSum::cosine(self.eps1, nu)),
            DriveKind::GaussianPulse { .. } | DriveKind::Custom { .. } => {
                Err(CoreError::NoClosedForm("slow pulse is not trigonometric".into()))
            }
        }
    }

    /// Frequencies the drive injects into the coupling.
    pub fn frequencies(&self) -> Vec<f64> {
        match self.kind {
            DriveKind::Sinusoidal { nu } | DriveKind::ResonantCosine { nu } => vec![nu.abs()],
            _ => Vec::new(),
        }
    }

    /// Slow drives must switch on softly: reject a pulse whose value or
    /// slope at tau = 0 exceeds `SOFT_SWITCH_TOL` relative to the amplitude.
    pub fn validate(&self) -> Result<(), CoreError> {
        if !self.is_slow() {
            return Ok(());
        }
        if let DriveKind::Custom { soft_switch: false, .. } = self.kind {
            return Err(CoreError::SoftSwitch { value: f64::INFINITY });
        }
        let rel = (self.xi(0.0) / self.eps1).abs().max((self.dxi_dtau(0.0) / self.eps1).abs());
        if rel > SOFT_SWITCH_TOL {
            return Err(CoreError::SoftSwitch { value: rel });
        }
        Ok(())
    }
}

/// Position operator in the oscillator eigenbasis:
/// x_mn = sqrt(n/2) delta_{m,n-1} + sqrt((n+1)/2) delta_{m,n+1}.
pub fn position_matrix(n_modes: usize) -> CMat {
    CMat::from_fn(n_modes, |m, n| {
        if m + 1 == n {
            Complex64::new((n as f64 / 2.0).sqrt(), 0.0)
        } else if m == n + 1 {
            Complex64::new(((n + 1) as f64 / 2.0).sqrt(), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Oscillator eigenfrequencies Omega_n = n + 1/2.
pub fn oscillator_spectrum(n_modes: usize) -> Vec<f64> {
    (0..n_modes).map(|n| n as f64 + 0.5).collect()
}

/// Coupling for a fast displacement drive, normalized so that the problem's
/// epsilon carries the drive amplitude: eps * v_mn(t) = -xi(t) x_mn.
pub fn displacement_coupling(n_modes: usize, profile: &DriveProfile) -> Result<CouplingModel, CoreError> {
    let x = position_matrix(n_modes);
    match profile.kind {
        DriveKind::AbruptConstant => Ok(CouplingModel::Constant(x.scale(Complex64::new(-1.0, 0.0)))),
        DriveKind::Sinusoidal { .. } | DriveKind::ResonantCosine { .. } => {
            let unit = DriveProfile { eps1: 1.0, ..profile.clone() };
            let shape = unit.as_trig()?;
            let v = (0..n_modes)
                .map(|m| {
                    (0..n_modes)
                        .map(|n| shape.scale(-x[(m, n)]))
                        .collect::<Vec<_>>()
                })
                .collect();
            Ok(CouplingModel::Trig(v))
        }
        DriveKind::GaussianPulse { .. } | DriveKind::Custom { .. } => {
            Err(CoreError::RequiresStationaryCoupling)
        }
    }
}

/// Instantaneous-basis coupling for a slow displacement drive:
/// v_mn(tau) = -(i xid / sqrt2) (sqrt(n+1) delta_{m,n+1} - sqrt(n) delta_{m,n-1})
/// with xid = eps * d(xi)/d(tau) the fast-time drive velocity.
pub fn velocity_coupling(
    n_modes: usize,
    profile: &DriveProfile,
    epsilon: f64,
) -> Result<CouplingModel, CoreError> {
    if !profile.is_slow() {
        return Err(CoreError::RequiresSlowCoupling);
    }
    profile.validate()?;
    let profile = profile.clone();
    Ok(CouplingModel::Slow(Arc::new(move |tau: f64| {
        let xid = epsilon * profile.dxi_dtau(tau);
        CMat::from_fn(n_modes, |m, n| {
            if m == n + 1 {
                Complex64::new(0.0, -xid / 2f64.sqrt()) * (m as f64).sqrt()
            } else if m + 1 == n {
                Complex64::new(0.0, xid / 2f64.sqrt()) * (n as f64).sqrt()
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    })))
}

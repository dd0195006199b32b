//! Problem description: unperturbed spectrum, coupling, initial state, and the
//! interaction-frame coupling matrix built from them.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::CoreError;
use crate::matrix::{CMat, HarmonicMatrix};
use crate::trig::TrigSum;

/// Hermiticity tolerance for user-supplied couplings.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Allowed deviation of the initial-state norm from 1.
pub const NORM_TOL: f64 = 1e-10;
/// Default resonance-detection width in units of epsilon.
pub const RHO_RES: f64 = 3.0;

/// Unperturbed mode frequencies; `slow_omega` supplies instantaneous
/// frequencies Omega_n(tau) for adiabatic problems (tau is slow time).
#[derive(Clone)]
pub struct SpectrumModel {
    pub omega0: Vec<f64>,
    pub slow_omega: Option<Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>>,
}

impl fmt::Debug for SpectrumModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectrumModel")
            .field("omega0", &self.omega0)
            .field("slow_omega", &self.slow_omega.as_ref().map(|_| "<fn>"))
            .finish()
    }
}

impl SpectrumModel {
    pub fn stationary(omega0: Vec<f64>) -> Self {
        SpectrumModel { omega0, slow_omega: None }
    }

    pub fn adiabatic(
        omega0: Vec<f64>,
        slow: impl Fn(f64) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        SpectrumModel { omega0, slow_omega: Some(Arc::new(slow)) }
    }

    pub fn dim(&self) -> usize {
        self.omega0.len()
    }

    /// omega_n - omega_m of the unperturbed spectrum.
    pub fn omega_diff(&self, n: usize, m: usize) -> f64 {
        self.omega0[n] - self.omega0[m]
    }
}

/// Coupling matrix elements v_nm in the Hamiltonian term eps * v(t).
#[derive(Clone)]
pub enum CouplingModel {
    /// Time-independent v_nm.
    Constant(CMat),
    /// Each v_nm(t) a finite trig sum (external drives).
    Trig(Vec<Vec<TrigSum>>),
    /// v_mn(tau) on the slow time tau = eps t, as entering the
    /// instantaneous-basis amplitude equation (any eps factors from slow time
    /// derivatives are the callback's responsibility).
    Slow(Arc<dyn Fn(f64) -> CMat + Send + Sync>),
}

impl fmt::Debug for CouplingModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CouplingModel::Constant(_) => f.write_str("CouplingModel::Constant"),
            CouplingModel::Trig(_) => f.write_str("CouplingModel::Trig"),
            CouplingModel::Slow(_) => f.write_str("CouplingModel::Slow"),
        }
    }
}

impl CouplingModel {
    pub fn dim(&self) -> usize {
        match self {
            CouplingModel::Constant(m) => m.dim(),
            CouplingModel::Trig(v) => v.len(),
            CouplingModel::Slow(f) => f(0.0).dim(),
        }
    }

    /// Hermiticity check: exact structure for constant/trig couplings, sampled
    /// in tau for slow ones.
    pub fn hermitian_defect(&self) -> f64 {
        match self {
            CouplingModel::Constant(m) => m.hermitian_defect(),
            CouplingModel::Trig(v) => {
                let n = v.len();
                let mut defect = 0.0f64;
                for r in 0..n {
                    for c in 0..n {
                        defect =
                            defect.max(v[r][c].sub(&v[c][r].adjoint()).max_amplitude());
                    }
                }
                defect
            }
            CouplingModel::Slow(f) => {
                let mut defect = 0.0f64;
                for k in 0..=16 {
                    defect = defect.max(f(k as f64 / 2.0).hermitian_defect());
                }
                defect
            }
        }
    }
}

/// Phase bookkeeping for the interaction frame.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PhaseConvention {
    /// Frame rotates with the bare frequencies omega_n^0.
    Bare,
    /// First-order diagonal shifts folded into the frame:
    /// Omega_n^0 = omega_n^0 + eps <v_nn>.
    Renormalized,
}

/// A perturbed mode-amplitude problem: `i c' = eps W(t) c` in the rotating
/// frame of `spectrum`, with `W` assembled from `coupling`.
#[derive(Clone, Debug)]
pub struct PerturbationProblem {
    pub spectrum: SpectrumModel,
    pub coupling: CouplingModel,
    pub epsilon: f64,
    pub initial: Vec<Complex64>,
    pub phase_convention: PhaseConvention,
}

impl PerturbationProblem {
    pub fn new(
        spectrum: SpectrumModel,
        coupling: CouplingModel,
        epsilon: f64,
        initial: Vec<Complex64>,
    ) -> Result<Self, CoreError> {
        let p = PerturbationProblem {
            spectrum,
            coupling,
            epsilon,
            initial,
            phase_convention: PhaseConvention::Bare,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(CoreError::InvalidEpsilon(self.epsilon));
        }
        let n = self.spectrum.dim();
        if self.coupling.dim() != n {
            return Err(CoreError::DimensionMismatch { expected: n, got: self.coupling.dim() });
        }
        if self.initial.len() != n {
            return Err(CoreError::DimensionMismatch { expected: n, got: self.initial.len() });
        }
        let norm = self.initial.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(CoreError::NotNormalized((norm - 1.0).abs()));
        }
        let defect = self.coupling.hermitian_defect();
        if defect > HERMITICITY_TOL {
            // Locate one offending pair for the message.
            return Err(CoreError::NotHermitian { m: 0, n: 0, deviation: defect });
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.spectrum.dim()
    }

    /// Frame frequencies: bare omega_n^0, or with the first-order diagonal DC
    /// folded in under the renormalized convention.
    pub fn frame_omega(&self) -> Vec<f64> {
        let mut om = self.spectrum.omega0.clone();
        if self.phase_convention == PhaseConvention::Renormalized {
            if let Some(diag) = self.diagonal_dc() {
                for (o, d) in om.iter_mut().zip(diag) {
                    *o += self.epsilon * d;
                }
            }
        }
        om
    }

    pub(crate) fn diagonal_dc(&self) -> Option<Vec<f64>> {
        match &self.coupling {
            CouplingModel::Constant(v) => {
                Some((0..v.dim()).map(|k| v[(k, k)].re).collect())
            }
            CouplingModel::Trig(v) => Some(
                (0..v.len())
                    .map(|k| v[k][k].average(crate::trig::RHO_MERGE).re)
                    .collect(),
            ),
            CouplingModel::Slow(_) => None,
        }
    }

    /// Interaction-frame coupling: entry (n, m) carries
    /// `v_nm(t) exp(i (omega_n - omega_m) t)` as a trig sum. The flow is
    /// `c' = -i eps W(t) c`. Requires a stationary coupling.
    pub fn build_h1(&self) -> Result<HarmonicMatrix, CoreError> {
        let n = self.dim();
        let omega = self.frame_omega();
        let renorm = self.phase_convention == PhaseConvention::Renormalized;
        let mut w = HarmonicMatrix::new(n);
        match &self.coupling {
            CouplingModel::Constant(v) => {
                for r in 0..n {
                    for c in 0..n {
                        let amp = v[(r, c)];
                        if amp.norm() == 0.0 {
                            continue;
                        }
                        let mut s = TrigSum::term(amp, omega[r] - omega[c]);
                        if renorm && r == c {
                            s = s.sub(&TrigSum::constant(Complex64::new(amp.re, 0.0)));
                        }
                        w.set(r, c, s);
                    }
                }
            }
            CouplingModel::Trig(v) => {
                for r in 0..n {
                    for c in 0..n {
                        if v[r][c].is_zero() {
                            continue;
                        }
                        let mut s = v[r][c].shift_frequency(omega[r] - omega[c]);
                        if renorm && r == c {
                            let dc = s.average(crate::trig::RHO_MERGE);
                            s = s.sub(&TrigSum::constant(dc));
                        }
                        w.set(r, c, s);
                    }
                }
            }
            CouplingModel::Slow(_) => return Err(CoreError::RequiresStationaryCoupling),
        }
        let defect = w.hermitian_defect();
        if defect > HERMITICITY_TOL {
            return Err(CoreError::NotHermitian { m: 0, n: 0, deviation: defect });
        }
        Ok(w)
    }

    /// Drive frequencies present in the coupling (for resonance detection).
    pub fn drive_frequencies(&self) -> Vec<f64> {
        match &self.coupling {
            CouplingModel::Trig(v) => {
                let mut freqs: Vec<f64> = v
                    .iter()
                    .flatten()
                    .flat_map(|s| s.terms().iter().map(|t| t.frequency.abs()))
                    .filter(|f| *f > crate::trig::RHO_MERGE)
                    .collect();
                freqs.sort_by(|a, b| a.partial_cmp(b).unwrap());
                freqs.dedup_by(|a, b| (*a - *b).abs() <= crate::trig::RHO_MERGE);
                freqs
            }
            _ => Vec::new(),
        }
    }
}

/// Why a pair of modes needs non-perturbative treatment.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ResonanceKind {
    /// The mode's own frame frequency: always listed, always "resonant".
    Principal,
    /// |omega_m - omega_n| = O(eps) for distinct modes.
    Internal,
    /// |omega_m - omega_n +- nu| = O(eps) for a drive frequency nu.
    External { nu: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Resonance {
    pub m: usize,
    pub n: usize,
    pub kind: ResonanceKind,
}

/// Scan mode pairs against the spectrum and drive frequencies. The output is
/// symmetric: if (m, n) is flagged so is (n, m). Principal entries (m, m) are
/// always present.
pub fn detect_resonances(
    spectrum: &SpectrumModel,
    drive_freqs: &[f64],
    epsilon: f64,
    rho_res: f64,
) -> Vec<Resonance> {
    let n = spectrum.dim();
    let width = rho_res * epsilon;
    let mut out = Vec::new();
    for k in 0..n {
        out.push(Resonance { m: k, n: k, kind: ResonanceKind::Principal });
    }
    for m in 0..n {
        for nn in 0..n {
            if m == nn {
                continue;
            }
            let w = spectrum.omega_diff(m, nn);
            if w.abs() <= width {
                out.push(Resonance { m, n: nn, kind: ResonanceKind::Internal });
            }
            for &nu in drive_freqs {
                if (w + nu).abs() <= width || (w - nu).abs() <= width {
                    out.push(Resonance { m, n: nn, kind: ResonanceKind::External { nu } });
                }
            }
        }
    }
    out
}

/// Action-angle image of a mode amplitude set: I_n = |c_n|^2,
/// psi_n = -arg c_n (zero-amplitude modes get angle 0).
#[derive(Clone, Debug, PartialEq)]
pub struct ActionAngleState {
    pub actions: Vec<f64>,
    pub angles: Vec<f64>,
}

pub fn to_action_angle(c: &[Complex64]) -> ActionAngleState {
    let mut actions = Vec::with_capacity(c.len());
    let mut angles = Vec::with_capacity(c.len());
    for z in c {
        actions.push(z.norm_sqr());
        angles.push(if z.norm() == 0.0 { 0.0 } else { -z.arg() });
    }
    ActionAngleState { actions, angles }
}

pub fn from_action_angle(state: &ActionAngleState) -> Vec<Complex64> {
    state
        .actions
        .iter()
        .zip(&state.angles)
        .map(|(&i, &psi)| i.max(0.0).sqrt() * Complex64::new(0.0, -psi).exp())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Two modes coupled by a real constant g: the interaction-frame entries
    /// carry the level-splitting frequencies.
    #[test]
    fn constant_coupling_frame_frequencies() {
        let g = c(0.3, 0.0);
        let v = CMat::from_fn(2, |r, cc| if r != cc { g } else { c(0.0, 0.0) });
        let p = PerturbationProblem::new(
            SpectrumModel::stationary(vec![0.5, 1.5]),
            CouplingModel::Constant(v),
            0.05,
            vec![c(1.0, 0.0), c(0.0, 0.0)],
        )
        .unwrap();
        let w = p.build_h1().unwrap();
        let e01 = w.get(0, 1);
        let e10 = w.get(1, 0);
        assert_eq!(e01.terms().len(), 1);
        assert!((e01.terms()[0].frequency + 1.0).abs() < 1e-15);
        assert!((e01.terms()[0].amplitude - g).norm() < 1e-15);
        assert!((e10.terms()[0].frequency - 1.0).abs() < 1e-15);
    }

    #[test]
    fn non_hermitian_coupling_is_rejected() {
        let mut v = CMat::zeros(2);
        v[(0, 1)] = c(0.3, 0.0);
        v[(1, 0)] = c(0.2, 0.0);
        let r = PerturbationProblem::new(
            SpectrumModel::stationary(vec![0.0, 1.0]),
            CouplingModel::Constant(v),
            0.1,
            vec![c(1.0, 0.0), c(0.0, 0.0)],
        );
        assert!(matches!(r, Err(CoreError::NotHermitian { .. })));
    }

    #[test]
    fn unnormalized_initial_state_is_rejected() {
        let r = PerturbationProblem::new(
            SpectrumModel::stationary(vec![0.0, 1.0]),
            CouplingModel::Constant(CMat::zeros(2)),
            0.1,
            vec![c(0.9, 0.0), c(0.0, 0.0)],
        );
        assert!(matches!(r, Err(CoreError::NotNormalized(_))));
    }

    #[test]
    fn epsilon_bounds_enforced() {
        for bad in [0.0, 1.0, -0.2, 1.7] {
            let r = PerturbationProblem::new(
                SpectrumModel::stationary(vec![0.0]),
                CouplingModel::Constant(CMat::zeros(1)),
                bad,
                vec![c(1.0, 0.0)],
            );
            assert!(matches!(r, Err(CoreError::InvalidEpsilon(_))));
        }
    }

    #[test]
    fn renormalized_convention_moves_diagonal_dc_into_frame() {
        let mut v = CMat::zeros(1);
        v[(0, 0)] = c(0.4, 0.0);
        let mut p = PerturbationProblem::new(
            SpectrumModel::stationary(vec![2.0]),
            CouplingModel::Constant(v),
            0.1,
            vec![c(1.0, 0.0)],
        )
        .unwrap();
        p.phase_convention = PhaseConvention::Renormalized;
        assert!((p.frame_omega()[0] - 2.04).abs() < 1e-15);
        let w = p.build_h1().unwrap();
        assert!(w.get(0, 0).is_zero());
    }

    #[test]
    fn external_resonance_detected_for_unit_drive() {
        let s = SpectrumModel::stationary(vec![0.5, 1.5]);
        let res = detect_resonances(&s, &[1.0], 0.05, RHO_RES);
        assert!(res
            .iter()
            .any(|r| r.m == 0 && r.n == 1 && matches!(r.kind, ResonanceKind::External { .. })));
        assert!(res
            .iter()
            .any(|r| r.m == 1 && r.n == 0 && matches!(r.kind, ResonanceKind::External { .. })));
        assert_eq!(
            res.iter().filter(|r| r.kind == ResonanceKind::Principal).count(),
            2
        );
        // Far-detuned drive: no external pair.
        let res2 = detect_resonances(&s, &[2.0], 0.05, RHO_RES);
        assert!(!res2
            .iter()
            .any(|r| matches!(r.kind, ResonanceKind::External { .. })));
    }

    #[test]
    fn internal_near_degeneracy_detected() {
        let s = SpectrumModel::stationary(vec![1.0, 1.0 + 0.01]);
        let res = detect_resonances(&s, &[], 0.05, RHO_RES);
        assert!(res
            .iter()
            .any(|r| r.m == 0 && r.n == 1 && r.kind == ResonanceKind::Internal));
    }

    #[test]
    fn action_angle_round_trip() {
        let state = vec![c(0.6, -0.3), c(0.0, 0.0), c(-0.2, 0.7)];
        let aa = to_action_angle(&state);
        assert_eq!(aa.angles[1], 0.0);
        let back = from_action_angle(&aa);
        for (a, b) in state.iter().zip(&back) {
            assert!((a - b).norm() < 1e-14);
        }
    }
}

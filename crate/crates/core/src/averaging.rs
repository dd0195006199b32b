//! Canonical averaging of the interaction-frame flow c' = -i eps W(t) c:
//! split W into its mean and fluctuation, absorb the fluctuation into a
//! near-identity change of variables built from the zero-mean antiderivative
//! {W}, and keep the second-order mean the substitution induces. Mode phases
//! then drift at the corrected rates while fast wiggles ride on top.

use num_complex::Complex64;

use crate::error::CoreError;
use crate::hermite::HermiteBasis;
use crate::matrix::{CMat, HarmonicMatrix};
use crate::model::{PerturbationProblem, RHO_RES};

/// An off-diagonal average above this is a resonance, not a perturbation.
pub const DC_GUARD: f64 = 1e-12;
/// Averaged Hamiltonians must be diagonal to this relative tolerance before
/// frequency shifts can be read off.
pub const DIAG_TOL: f64 = 1e-10;
/// Default horizon constant: approximations are trusted for t <= C_h / eps.
pub const DEFAULT_HORIZON: f64 = 1.0;

/// The averaging decomposition of one problem, all in the interaction frame.
pub struct AveragedHamiltonians {
    /// Full interaction-frame coupling W.
    pub w: HarmonicMatrix,
    /// First-order mean <W>.
    pub h1_bar: CMat,
    /// Zero-mean antiderivative {W}.
    pub h1_brace: HarmonicMatrix,
    /// Second-order mean i <{W} W~>.
    pub h2_bar: CMat,
    pub epsilon: f64,
    /// Frequencies within rho_dc of zero count as DC.
    pub rho_dc: f64,
}

/// Averaged solution as an explicit coefficient map over fast time.
pub struct ApproxSolution {
    pub order: usize,
    pub epsilon: f64,
    /// Fast-time horizon C_h / eps the expansion is built to cover.
    pub valid_horizon: f64,
    pub frame_omega: Vec<f64>,
    coeff_fn: Box<dyn Fn(f64) -> Vec<Complex64> + Send + Sync>,
}

impl ApproxSolution {
    pub fn coefficients(&self, t: f64) -> Vec<Complex64> {
        (self.coeff_fn)(t)
    }

    /// Reassemble the wavefunction value sum_k c_k(t) phi_k(x) e^{-i w_k t}.
    pub fn wavefunction(&self, basis: &HermiteBasis, t: f64, x: f64) -> Complex64 {
        let cs = self.coefficients(t);
        let phis = basis.values(x);
        cs.iter()
            .zip(&phis)
            .zip(&self.frame_omega)
            .map(|((c, phi), w)| c * phi * Complex64::new(0.0, -w * t).exp())
            .sum()
    }
}

/// Build the averaging decomposition. Fails with `ResonantDc` when any
/// off-diagonal coupling entry has weight inside the DC band: such a pair
/// evolves non-perturbatively and needs the dedicated two-level or ladder
/// treatment instead.
pub fn averaged_hamiltonians(
    problem: &PerturbationProblem,
) -> Result<AveragedHamiltonians, CoreError> {
    let w = problem.build_h1()?;
    let epsilon = problem.epsilon;
    let rho_dc = RHO_RES * epsilon;
    for (&(m, n), s) in w.iter() {
        if m != n {
            let dc = s.average(rho_dc).norm();
            if dc > DC_GUARD {
                return Err(CoreError::ResonantDc { m, n, magnitude: dc });
            }
        }
    }
    let h1_bar = w.average(rho_dc);
    let h1_brace = w.brace(rho_dc);
    let fluct = w.fluctuation(rho_dc);
    let h2_bar = h1_brace.mul(&fluct)?.average(rho_dc).scale(Complex64::i());
    Ok(AveragedHamiltonians { w, h1_bar, h1_brace, h2_bar, epsilon, rho_dc })
}

/// Per-mode frequency shifts eps h1_kk + eps^2 h2_kk. Requires both averaged
/// Hamiltonians to be diagonal and real on the diagonal; anything else means
/// an undetected resonance and is refused.
pub fn frequency_shifts(avg: &AveragedHamiltonians) -> Result<Vec<f64>, CoreError> {
    let n = avg.h1_bar.dim();
    for (name, h) in [("h1", &avg.h1_bar), ("h2", &avg.h2_bar)] {
        let scale = 1.0 + (0..n).map(|k| h[(k, k)].norm()).fold(0.0, f64::max);
        for r in 0..n {
            for c in 0..n {
                if r != c && h[(r, c)].norm() > DIAG_TOL * scale {
                    return Err(CoreError::NotDiagonal {
                        m: r,
                        n: c,
                        magnitude: h[(r, c)].norm(),
                    });
                }
            }
            if h[(r, r)].im.abs() > DIAG_TOL * scale {
                return Err(CoreError::NotHermitian {
                    m: r,
                    n: r,
                    deviation: h[(r, r)].im.abs(),
                });
            }
        }
        let _ = name;
    }
    Ok((0..n)
        .map(|k| avg.epsilon * avg.h1_bar[(k, k)].re + avg.epsilon.powi(2) * avg.h2_bar[(k, k)].re)
        .collect())
}

/// First-order averaged solution: c_k(t) = c_k(0) e^{-i eps h1_kk t}.
pub fn solve_first_order(
    problem: &PerturbationProblem,
    horizon_constant: f64,
) -> Result<ApproxSolution, CoreError> {
    let avg = averaged_hamiltonians(problem)?;
    frequency_shifts(&avg)?;
    let n = problem.dim();
    let shifts: Vec<f64> = (0..n).map(|k| avg.epsilon * avg.h1_bar[(k, k)].re).collect();
    let c0 = problem.initial.clone();
    let epsilon = problem.epsilon;
    Ok(ApproxSolution {
        order: 1,
        epsilon,
        valid_horizon: horizon_constant / epsilon,
        frame_omega: problem.frame_omega(),
        coeff_fn: Box::new(move |t| {
            c0.iter()
                .zip(&shifts)
                .map(|(c, dw)| c * Complex64::new(0.0, -dw * t).exp())
                .collect()
        }),
    })
}

/// Second-order averaged solution:
/// c_k(t) = A_k e^{-i dw_k t} - i eps ({W}(t) [c(0) e^{-i dw t}])_k
/// with A = c(0) + i eps {W}(0) c(0), so that c(0) is reproduced exactly.
pub fn solve_second_order(
    problem: &PerturbationProblem,
    horizon_constant: f64,
) -> Result<ApproxSolution, CoreError> {
    let avg = averaged_hamiltonians(problem)?;
    let shifts = frequency_shifts(&avg)?;
    let c0 = problem.initial.clone();
    let epsilon = problem.epsilon;
    let brace0 = avg.h1_brace.apply(0.0, &c0);
    let a2: Vec<Complex64> = c0
        .iter()
        .zip(&brace0)
        .map(|(c, b)| c + Complex64::i() * epsilon * b)
        .collect();
    let brace = avg.h1_brace.clone();
    Ok(ApproxSolution {
        order: 2,
        epsilon,
        valid_horizon: horizon_constant / epsilon,
        frame_omega: problem.frame_omega(),
        coeff_fn: Box::new(move |t| {
            let dressed: Vec<Complex64> = c0
                .iter()
                .zip(&shifts)
                .map(|(c, dw)| c * Complex64::new(0.0, -dw * t).exp())
                .collect();
            let wiggle = brace.apply(t, &dressed);
            a2.iter()
                .zip(&shifts)
                .zip(&wiggle)
                .map(|((a, dw), wg)| {
                    a * Complex64::new(0.0, -dw * t).exp() - Complex64::i() * epsilon * wg
                })
                .collect()
        }),
    })
}

/// Textbook first-order expansion with the particular antiderivative and no
/// matching constant: a(t) = c(0) - i eps {W}(t) c(0). Keeps neither the
/// initial condition nor the secular phase drift; kept for comparison runs.
pub fn standard_pt(problem: &PerturbationProblem) -> Result<ApproxSolution, CoreError> {
    let avg = averaged_hamiltonians(problem)?;
    let c0 = problem.initial.clone();
    let epsilon = problem.epsilon;
    let brace = avg.h1_brace.clone();
    Ok(ApproxSolution {
        order: 1,
        epsilon,
        valid_horizon: DEFAULT_HORIZON / epsilon,
        frame_omega: problem.frame_omega(),
        coeff_fn: Box::new(move |t| {
            let wiggle = brace.apply(t, &c0);
            c0.iter()
                .zip(&wiggle)
                .map(|(c, wg)| c - Complex64::i() * epsilon * wg)
                .collect()
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drive::{displacement_coupling, oscillator_spectrum, DriveKind, DriveProfile};
    use crate::model::SpectrumModel;

    fn ground_start(n: usize) -> Vec<Complex64> {
        let mut c0 = vec![Complex64::new(0.0, 0.0); n];
        c0[0] = Complex64::new(1.0, 0.0);
        c0
    }

    fn abrupt_problem(n: usize, eps: f64) -> PerturbationProblem {
        let profile = DriveProfile::new(DriveKind::AbruptConstant, eps);
        PerturbationProblem::new(
            SpectrumModel::stationary(oscillator_spectrum(n)),
            displacement_coupling(n, &profile).unwrap(),
            eps,
            ground_start(n),
        )
        .unwrap()
    }

    fn sine_problem(n: usize, eps1: f64, nu: f64) -> PerturbationProblem {
        let profile = DriveProfile::new(DriveKind::Sinusoidal { nu }, eps1);
        PerturbationProblem::new(
            SpectrumModel::stationary(oscillator_spectrum(n)),
            displacement_coupling(n, &profile).unwrap(),
            eps1,
            ground_start(n),
        )
        .unwrap()
    }

    #[test]
    fn abrupt_second_order_mean_is_uniform_with_edge_artifact() {
        let p = abrupt_problem(8, 0.1);
        let avg = averaged_hamiltonians(&p).unwrap();
        assert!(avg.h1_bar.max_off_diagonal() < 1e-14);
        for k in 0..8 {
            assert!(avg.h1_bar[(k, k)].norm() < 1e-14);
        }
        for k in 0..7 {
            assert!((avg.h2_bar[(k, k)].re + 0.5).abs() < 1e-13, "k={k}");
            assert!(avg.h2_bar[(k, k)].im.abs() < 1e-13);
        }
        // Truncation cuts the upward neighbor of the top mode; its shift is
        // the one-sided artifact (N-1)/2, not -1/2.
        assert!((avg.h2_bar[(7, 7)].re - 3.5).abs() < 1e-13);
        let shifts = frequency_shifts(&avg).unwrap();
        for k in 0..7 {
            assert!((shifts[k] + 0.5 * 0.01).abs() < 1e-14);
        }
    }

    #[test]
    fn abrupt_second_order_solution_matches_hand_expansion() {
        let (n, eps) = (8, 0.1);
        let p = abrupt_problem(n, eps);
        let sol = solve_second_order(&p, 1.0).unwrap();
        for &t in &[0.0, 0.8, 4.4, 9.7] {
            let cs = sol.coefficients(t);
            let common = Complex64::new(0.0, eps * eps * t / 2.0).exp();
            let c1 = (eps / 2f64.sqrt())
                * ((Complex64::new(0.0, t)).exp() - 1.0)
                * common;
            assert!((cs[0] - common).norm() < 1e-14, "t={t}");
            assert!((cs[1] - c1).norm() < 1e-14, "t={t}");
            for k in 2..n - 1 {
                assert!(cs[k].norm() < 1e-14);
            }
        }
    }

    #[test]
    fn second_order_reproduces_initial_condition_exactly() {
        let p = sine_problem(8, 0.1, 2.0);
        let sol = solve_second_order(&p, 1.0).unwrap();
        let cs = sol.coefficients(0.0);
        assert!((cs[0] - 1.0).norm() < 1e-15);
        for c in &cs[1..] {
            assert!(c.norm() < 1e-15);
        }
    }

    #[test]
    fn sine_drive_first_mode_matches_hand_expansion() {
        let (eps1, nu) = (0.1, 2.0);
        let p = sine_problem(8, eps1, nu);
        let sol = solve_second_order(&p, 1.0).unwrap();
        let dw = eps1 * eps1 / (4.0 * (nu * nu - 1.0));
        let rt2 = 2f64.sqrt();
        for &t in &[0.0, 0.9, 3.3] {
            let cs = sol.coefficients(t);
            let a2 = Complex64::i() * eps1 * nu / (rt2 * (nu * nu - 1.0));
            let osc = Complex64::i() * eps1 / (rt2 * (nu * nu - 1.0))
                * Complex64::new(0.0, t).exp()
                * (Complex64::i() * (nu * t).sin() - nu * (nu * t).cos());
            let expect = (a2 + osc) * Complex64::new(0.0, -dw * t).exp();
            assert!((cs[1] - expect).norm() < 1e-13, "t={t}");
        }
    }

    #[test]
    fn near_resonant_drive_is_refused() {
        let p = sine_problem(8, 0.1, 1.001);
        match averaged_hamiltonians(&p) {
            Err(CoreError::ResonantDc { .. }) => {}
            other => panic!("expected ResonantDc, got {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn standard_pt_violates_initial_condition_by_known_amount() {
        let (eps1, nu) = (0.1, 2.0);
        let p = sine_problem(8, eps1, nu);
        let sol = standard_pt(&p).unwrap();
        let at0 = sol.coefficients(0.0);
        let deficit = eps1 * nu / (2f64.sqrt() * (nu * nu - 1.0));
        assert!((at0[1].norm() - deficit).abs() < 1e-14);
    }

    #[test]
    fn synthetic_off_diagonal_mean_is_rejected_by_shift_extraction() {
        let p = abrupt_problem(4, 0.1);
        let mut avg = averaged_hamiltonians(&p).unwrap();
        avg.h2_bar[(0, 1)] = Complex64::new(0.5, 0.0);
        assert!(matches!(
            frequency_shifts(&avg),
            Err(CoreError::NotDiagonal { m: 0, n: 1, .. })
        ));
    }
}

//! Slowly parametrized problems in the instantaneous eigenframe. The flow
//! c_m' = -i sum_n v_mn(eps t) c_n e^{+i int Omega_mn} averages to per-mode
//! frequency corrections sum_l |v_kl|^2 / Omega_kl; the solver keeps those
//! plus the first-order wiggle. The bare adiabatic expansion (no corrections)
//! is included as the comparison baseline.

use std::cell::RefCell;
use std::rc::Rc;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::CoreError;
use crate::matrix::CMat;
use crate::model::{CouplingModel, PerturbationProblem};
use crate::quad::CumulativeIntegral;

/// Instantaneous gaps below this are crossings; the frame breaks down.
pub const GAP_FLOOR: f64 = 1e-9;
/// Slow-time grid used to pre-scan for level crossings.
const CROSSING_SCAN: usize = 2048;

type CumF = CumulativeIntegral<Box<dyn FnMut(f64) -> Complex64>>;

fn i_unit() -> Complex64 {
    Complex64::new(0.0, 1.0)
}

/// Per-mode second-order frequency corrections at one slow time:
/// shift_k = sum_{l != k} |v_kl|^2 / (Omega_k - Omega_l).
pub fn instantaneous_shifts(v: &CMat, omega: &[f64], tau: f64) -> Result<Vec<f64>, CoreError> {
    let n = omega.len();
    assert_eq!(v.dim(), n);
    let mut out = vec![0.0; n];
    for k in 0..n {
        for l in 0..n {
            if l == k {
                continue;
            }
            let num = v[(k, l)].norm_sqr();
            if num == 0.0 {
                continue;
            }
            let gap = omega[k] - omega[l];
            if gap.abs() < GAP_FLOOR {
                return Err(CoreError::LevelCrossing { m: k, n: l, tau, gap: gap.abs() });
            }
            out[k] += num / gap;
        }
    }
    Ok(out)
}

struct SlowProblem {
    epsilon: f64,
    n: usize,
    coupling: Arc<dyn Fn(f64) -> CMat + Send + Sync>,
    omega: Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>,
}

fn slow_problem(problem: &PerturbationProblem) -> Result<SlowProblem, CoreError> {
    let coupling = match &problem.coupling {
        CouplingModel::Slow(f) => Arc::clone(f),
        _ => return Err(CoreError::RequiresSlowCoupling),
    };
    let omega: Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync> = match &problem.spectrum.slow_omega {
        Some(f) => Arc::clone(f),
        None => {
            let fixed = problem.spectrum.omega0.clone();
            Arc::new(move |_| fixed.clone())
        }
    };
    Ok(SlowProblem { epsilon: problem.epsilon, n: problem.dim(), coupling, omega })
}

/// Scan [0, tau_end] for gaps between coupled modes falling under `GAP_FLOOR`.
fn scan_for_crossings(sp: &SlowProblem, tau_end: f64) -> Result<(), CoreError> {
    for j in 0..=CROSSING_SCAN {
        let tau = tau_end * j as f64 / CROSSING_SCAN as f64;
        instantaneous_shifts(&(sp.coupling)(tau), &(sp.omega)(tau), tau)?;
    }
    Ok(())
}

fn lambda_integrals(sp: &SlowProblem, t_end: f64, tol: f64) -> Result<Vec<Rc<RefCell<CumF>>>, CoreError> {
    (0..sp.n)
        .map(|k| {
            let omega = Arc::clone(&sp.omega);
            let eps = sp.epsilon;
            let f: Box<dyn FnMut(f64) -> Complex64> =
                Box::new(move |z| Complex64::new(omega(eps * z)[k], 0.0));
            Ok(Rc::new(RefCell::new(CumulativeIntegral::new(f, t_end, 2.0, tol)?)))
        })
        .collect()
}

/// Averaged solution in the instantaneous frame, valid to t_end:
/// c_k(t) = A_k e^{-i alpha_k} - sum_{n != k} (v_kn / Omega_kn)(eps t)
///          c_n(0) e^{-i alpha_n} e^{+i (Lambda_k - Lambda_n)}
/// with alpha_k = int_0^t shift_k(eps z) dz and A chosen so c(0) is exact.
pub struct PostAdiabaticSolution {
    pub epsilon: f64,
    pub t_end: f64,
    n: usize,
    coupling: Arc<dyn Fn(f64) -> CMat + Send + Sync>,
    omega: Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>,
    a1: Vec<Complex64>,
    a2: Vec<Complex64>,
    lambdas: Vec<Rc<RefCell<CumF>>>,
    alphas: Vec<RefCell<CumF>>,
}

pub fn post_adiabatic(
    problem: &PerturbationProblem,
    t_end: f64,
) -> Result<PostAdiabaticSolution, CoreError> {
    problem.validate()?;
    let sp = slow_problem(problem)?;
    scan_for_crossings(&sp, sp.epsilon * t_end)?;
    let lambdas = lambda_integrals(&sp, t_end, 1e-11)?;
    let alphas: Vec<RefCell<CumF>> = (0..sp.n)
        .map(|k| {
            let coupling = Arc::clone(&sp.coupling);
            let omega = Arc::clone(&sp.omega);
            let eps = sp.epsilon;
            let f: Box<dyn FnMut(f64) -> Complex64> = Box::new(move |z| {
                let tau = eps * z;
                let shifts = instantaneous_shifts(&coupling(tau), &omega(tau), tau)
                    .expect("crossing appeared between scan points");
                Complex64::new(shifts[k], 0.0)
            });
            Ok(RefCell::new(CumulativeIntegral::new(f, t_end, 2.0, 1e-12)?))
        })
        .collect::<Result<_, CoreError>>()?;

    let a1 = problem.initial.clone();
    let v0 = (sp.coupling)(0.0);
    let om0 = (sp.omega)(0.0);
    let mut a2 = a1.clone();
    for k in 0..sp.n {
        for n in 0..sp.n {
            if n == k || v0[(k, n)].norm() == 0.0 {
                continue;
            }
            a2[k] += v0[(k, n)] / (om0[k] - om0[n]) * a1[n];
        }
    }
    Ok(PostAdiabaticSolution {
        epsilon: sp.epsilon,
        t_end,
        n: sp.n,
        coupling: sp.coupling,
        omega: sp.omega,
        a1,
        a2,
        lambdas,
        alphas,
    })
}

impl PostAdiabaticSolution {
    pub fn coefficients(&self, t: f64) -> Result<Vec<Complex64>, CoreError> {
        let tau = self.epsilon * t;
        let v = (self.coupling)(tau);
        let om = (self.omega)(tau);
        let lam: Vec<f64> = self
            .lambdas
            .iter()
            .map(|l| l.borrow_mut().eval(t).map(|x| x.re))
            .collect::<Result<_, _>>()?;
        let alpha: Vec<f64> = self
            .alphas
            .iter()
            .map(|a| a.borrow_mut().eval(t).map(|x| x.re))
            .collect::<Result<_, _>>()?;
        let mut out = Vec::with_capacity(self.n);
        for k in 0..self.n {
            let mut c = self.a2[k] * Complex64::new(0.0, -alpha[k]).exp();
            for n in 0..self.n {
                if n == k || v[(k, n)].norm() == 0.0 || self.a1[n].norm() == 0.0 {
                    continue;
                }
                c -= v[(k, n)] / (om[k] - om[n])
                    * self.a1[n]
                    * Complex64::new(0.0, -alpha[n] + lam[k] - lam[n]).exp();
            }
            out.push(c);
        }
        Ok(out)
    }

    /// alpha_k(t): the accumulated frequency-correction phase of one mode.
    pub fn correction_phase(&self, k: usize, t: f64) -> Result<f64, CoreError> {
        Ok(self.alphas[k].borrow_mut().eval(t)?.re)
    }
}

/// Bare adiabatic expansion from a single initially occupied mode `source`:
/// c_k(t) = delta_{k,source} - i int_0^t v_ks(eps z) e^{i eta_ks(z)} dz.
/// No frequency corrections: the phase left out of c_source is exactly the
/// accumulated correction, which is what the averaged solver restores.
pub struct BornFockSolution {
    pub epsilon: f64,
    pub source: usize,
    n: usize,
    integrals: Vec<Option<RefCell<CumF>>>,
}

pub fn born_fock(problem: &PerturbationProblem, t_end: f64) -> Result<BornFockSolution, CoreError> {
    problem.validate()?;
    let sp = slow_problem(problem)?;
    let source = {
        let occupied: Vec<usize> = problem
            .initial
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm() > 1e-12)
            .map(|(k, _)| k)
            .collect();
        match occupied.as_slice() {
            [s] => *s,
            _ => {
                return Err(CoreError::Config(
                    "the bare adiabatic expansion needs a single occupied mode".into(),
                ))
            }
        }
    };
    let lambdas = lambda_integrals(&sp, t_end, 1e-11)?;
    let integrals: Vec<Option<RefCell<CumF>>> = (0..sp.n)
        .map(|k| {
            if k == source {
                return Ok(None);
            }
            let coupling = Arc::clone(&sp.coupling);
            let eps = sp.epsilon;
            let lam_k = Rc::clone(&lambdas[k]);
            let lam_s = Rc::clone(&lambdas[source]);
            let f: Box<dyn FnMut(f64) -> Complex64> = Box::new(move |z| {
                let v = coupling(eps * z)[(k, source)];
                if v.norm() == 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                let eta = lam_k.borrow_mut().eval(z).expect("lambda quadrature").re
                    - lam_s.borrow_mut().eval(z).expect("lambda quadrature").re;
                v * Complex64::new(0.0, eta).exp()
            });
            Ok(Some(RefCell::new(CumulativeIntegral::new(f, t_end, 0.75, 1e-11)?)))
        })
        .collect::<Result<_, CoreError>>()?;
    Ok(BornFockSolution { epsilon: sp.epsilon, source, n: sp.n, integrals })
}

impl BornFockSolution {
    pub fn coefficients(&self, t: f64) -> Result<Vec<Complex64>, CoreError> {
        (0..self.n)
            .map(|k| match &self.integrals[k] {
                None => Ok(Complex64::new(1.0, 0.0)),
                Some(ci) => Ok(-i_unit() * ci.borrow_mut().eval(t)?),
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drive::{velocity_coupling, DriveKind, DriveProfile};
    use crate::model::SpectrumModel;
    use crate::quad::integrate_complex;

    fn pulse() -> DriveProfile {
        DriveProfile::new(DriveKind::GaussianPulse { tau0: 5.0, width: 1.0 }, 1.0)
    }

    fn slow_oscillator(n: usize, eps: f64) -> PerturbationProblem {
        let profile = pulse();
        let for_omega = profile.clone();
        let mut c0 = vec![Complex64::new(0.0, 0.0); n];
        c0[0] = Complex64::new(1.0, 0.0);
        PerturbationProblem::new(
            SpectrumModel::adiabatic(
                (0..n).map(|k| k as f64 + 0.5).collect(),
                move |tau: f64| {
                    let xi = for_omega.xi(tau);
                    (0..n).map(|k| k as f64 + 0.5 - 0.5 * xi * xi).collect()
                },
            ),
            velocity_coupling(n, &profile, eps).unwrap(),
            eps,
            c0,
        )
        .unwrap()
    }

    #[test]
    fn oscillator_shifts_are_uniform_with_edge_artifact() {
        let n = 6;
        let eps = 0.1;
        let profile = pulse();
        let tau = 3.8;
        let p = slow_oscillator(n, eps);
        let v = match &p.coupling {
            CouplingModel::Slow(f) => f(tau),
            _ => unreachable!(),
        };
        let omega: Vec<f64> = (0..n).map(|k| k as f64 + 0.5).collect();
        let shifts = instantaneous_shifts(&v, &omega, tau).unwrap();
        let xid = eps * profile.dxi_dtau(tau);
        for k in 0..n - 1 {
            assert!((shifts[k] + 0.5 * xid * xid).abs() < 1e-14, "k={k}");
        }
        let edge = 0.5 * xid * xid * (n as f64 - 1.0);
        assert!((shifts[n - 1] - edge).abs() < 1e-13);
    }

    #[test]
    fn crossing_is_detected() {
        let mut v = CMat::zeros(2);
        v[(0, 1)] = Complex64::new(0.1, 0.0);
        v[(1, 0)] = Complex64::new(0.1, 0.0);
        let omega = [1.0, 1.0 + 1e-12];
        assert!(matches!(
            instantaneous_shifts(&v, &omega, 0.3),
            Err(CoreError::LevelCrossing { .. })
        ));
    }

    #[test]
    fn initial_condition_is_exact_and_ground_phase_is_theta() {
        let eps = 0.1;
        let t_end = 100.0;
        let p = slow_oscillator(8, eps);
        let sol = post_adiabatic(&p, t_end).unwrap();
        let at0 = sol.coefficients(0.0).unwrap();
        assert!((at0[0] - 1.0).norm() < 1e-12);
        for c in &at0[1..] {
            assert!(c.norm() < 1e-12);
        }
        let profile = pulse();
        for &t in &[30.0, 60.0, 100.0] {
            let theta = crate::quad::integrate(
                |z| {
                    let xid = eps * profile.dxi_dtau(eps * z);
                    0.5 * xid * xid
                },
                0.0,
                t,
                1e-12,
            )
            .unwrap();
            let c0 = sol.coefficients(t).unwrap()[0];
            // c_0 = e^{-i alpha_0} and alpha_0 = -Theta.
            assert!((c0.arg() - theta).abs() < 1e-9, "t={t}");
            assert!((sol.correction_phase(0, t).unwrap() + theta).abs() < 1e-9);
        }
    }

    #[test]
    fn bare_expansion_matches_direct_drive_quadrature() {
        let eps = 0.1;
        let t_end = 100.0;
        let p = slow_oscillator(8, eps);
        let bf = born_fock(&p, t_end).unwrap();
        let profile = pulse();
        for &t in &[25.0, 55.0, 95.0] {
            let cs = bf.coefficients(t).unwrap();
            assert_eq!(cs[0], Complex64::new(1.0, 0.0));
            let direct = integrate_complex(
                |z| {
                    let xid = eps * profile.dxi_dtau(eps * z);
                    xid * Complex64::new(0.0, z).exp() / 2f64.sqrt()
                },
                0.0,
                t,
                &[],
                1e-12,
            )
            .unwrap();
            let expect = -direct;
            assert!((cs[1] - expect).norm() < 1e-9, "t={t}");
            for c in &cs[2..] {
                assert!(c.norm() < 1e-12);
            }
        }
    }
}

//! Brute-force reference integration of the mode-amplitude equations with a
//! Dormand-Prince 5(4) embedded pair. Deliberately independent of the
//! averaging machinery: the right-hand side evaluates coupling entries and
//! frame exponentials directly at each stage.

use std::io::Write;

use num_complex::Complex64;

use crate::error::CoreError;
use crate::model::{CouplingModel, PerturbationProblem};

/// Norm drift beyond this voids the integration.
pub const NORM_DRIFT_LIMIT: f64 = 1e-6;
/// Default absolute and relative tolerance.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Sampling density floor: points per fastest oscillation period.
pub const SAMPLES_PER_PERIOD: f64 = 40.0;

/// Dormand-Prince 5(4) tableau, flat layout.
/// c nodes: 0, 1/5, 3/10, 4/5, 8/9, 1, 1.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
/// 5th-order weights (row 6 of A; FSAL).
const B5: [f64; 7] =
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
/// Embedded 4th-order weights.
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Sampled reference solution. `states` holds the mode amplitudes at `times`;
/// `norm_drift` is the largest |norm - 1| seen at any accepted step.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<Complex64>>,
    pub norm_drift: f64,
}

impl Trajectory {
    pub fn state_at(&self, idx: usize) -> &[Complex64] {
        &self.states[idx]
    }

    /// CSV export: `t, re_c0, im_c0, ..., norm` per sample.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let n = self.states.first().map_or(0, |s| s.len());
        write!(w, "t")?;
        for k in 0..n {
            write!(w, ",re_c{k},im_c{k}")?;
        }
        writeln!(w, ",norm")?;
        for (t, state) in self.times.iter().zip(&self.states) {
            write!(w, "{t:.12e}")?;
            for c in state {
                write!(w, ",{:.12e},{:.12e}", c.re, c.im)?;
            }
            let norm = state.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            writeln!(w, ",{norm:.12e}")?;
        }
        Ok(())
    }
}

/// The amplitude-equation right-hand side, evaluated directly from the model.
enum Rhs<'a> {
    /// c' = -i eps sum_n v_mn exp(i w_mn t) c_n with constant v. `dc` holds
    /// the diagonal DC already folded into the frame frequencies (zero under
    /// the bare convention), which must not act twice.
    Stationary {
        v: Vec<Vec<Complex64>>,
        omega: Vec<f64>,
        eps: f64,
        dc: Vec<f64>,
        trig: Option<&'a Vec<Vec<crate::trig::TrigSum>>>,
    },
    /// Instantaneous frame: state is [c; eta] with eta_k' = Omega_k(eps t)
    /// and c_m' = -i sum_n v_mn(eps t) exp(i (eta_m - eta_n)) c_n.
    Slow {
        problem: &'a PerturbationProblem,
        dim: usize,
    },
}

impl Rhs<'_> {
    fn dim(&self) -> usize {
        match self {
            Rhs::Stationary { omega, .. } => omega.len(),
            Rhs::Slow { dim, .. } => *dim,
        }
    }

    fn state_len(&self) -> usize {
        match self {
            Rhs::Stationary { .. } => self.dim(),
            Rhs::Slow { dim, .. } => 2 * dim,
        }
    }

    fn eval(&self, t: f64, y: &[Complex64], dy: &mut [Complex64]) {
        match self {
            Rhs::Stationary { v, omega, eps, dc, trig } => {
                let n = omega.len();
                for m in 0..n {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for k in 0..n {
                        let mut amp = match trig {
                            Some(vs) => vs[m][k].eval(t),
                            None => v[m][k],
                        };
                        if m == k {
                            amp -= dc[k];
                        }
                        if amp.norm_sqr() == 0.0 {
                            continue;
                        }
                        let phase = Complex64::new(0.0, (omega[m] - omega[k]) * t).exp();
                        acc += amp * phase * y[k];
                    }
                    dy[m] = Complex64::new(0.0, -eps) * acc;
                }
            }
            Rhs::Slow { problem, dim } => {
                let n = *dim;
                let tau = problem.epsilon * t;
                let vmat = match &problem.coupling {
                    CouplingModel::Slow(f) => f(tau),
                    _ => unreachable!("slow RHS built for slow coupling only"),
                };
                let omega_now: Vec<f64> = match &problem.spectrum.slow_omega {
                    Some(f) => f(tau),
                    None => problem.spectrum.omega0.clone(),
                };
                for m in 0..n {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for k in 0..n {
                        let amp = vmat[(m, k)];
                        if amp.norm_sqr() == 0.0 {
                            continue;
                        }
                        let phase =
                            Complex64::new(0.0, y[n + m].re - y[n + k].re).exp();
                        acc += amp * phase * y[k];
                    }
                    dy[m] = Complex64::new(0.0, -1.0) * acc;
                }
                for k in 0..n {
                    dy[n + k] = Complex64::new(omega_now[k], 0.0);
                }
            }
        }
    }
}

fn build_rhs(problem: &PerturbationProblem) -> Rhs<'_> {
    let dc = if problem.phase_convention == crate::model::PhaseConvention::Renormalized {
        problem.diagonal_dc().unwrap_or_else(|| vec![0.0; problem.dim()])
    } else {
        vec![0.0; problem.dim()]
    };
    match &problem.coupling {
        CouplingModel::Constant(v) => {
            let n = v.dim();
            Rhs::Stationary {
                v: (0..n).map(|r| (0..n).map(|c| v[(r, c)]).collect()).collect(),
                omega: problem.frame_omega(),
                eps: problem.epsilon,
                dc,
                trig: None,
            }
        }
        CouplingModel::Trig(v) => Rhs::Stationary {
            v: Vec::new(),
            omega: problem.frame_omega(),
            eps: problem.epsilon,
            dc,
            trig: Some(v),
        },
        CouplingModel::Slow(_) => Rhs::Slow { problem, dim: problem.dim() },
    }
}

fn initial_full_state(rhs: &Rhs, problem: &PerturbationProblem) -> Vec<Complex64> {
    let mut y = problem.initial.clone();
    y.resize(rhs.state_len(), Complex64::new(0.0, 0.0));
    y
}

fn mode_norm(y: &[Complex64], n_modes: usize) -> f64 {
    y[..n_modes].iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Weighted rms of the embedded error estimate.
fn error_norm(err: &[Complex64], y0: &[Complex64], y1: &[Complex64], tol: f64) -> f64 {
    let n = err.len() as f64;
    let s: f64 = err
        .iter()
        .zip(y0.iter().zip(y1))
        .map(|(e, (a, b))| {
            let scale = tol + tol * a.norm().max(b.norm());
            (e.norm() / scale).powi(2)
        })
        .sum();
    (s / n).sqrt()
}

struct Stepper<'a> {
    rhs: Rhs<'a>,
    tol: f64,
    t: f64,
    y: Vec<Complex64>,
    k1: Vec<Complex64>,
    n_modes: usize,
    norm_drift: f64,
    h: f64,
}

impl<'a> Stepper<'a> {
    fn new(problem: &'a PerturbationProblem, tol: f64, h0: f64) -> Self {
        let rhs = build_rhs(problem);
        let y = initial_full_state(&rhs, problem);
        let mut k1 = vec![Complex64::new(0.0, 0.0); y.len()];
        rhs.eval(0.0, &y, &mut k1);
        let n_modes = problem.dim();
        Stepper { rhs, tol, t: 0.0, y, k1, n_modes, norm_drift: 0.0, h: h0 }
    }

    /// One accepted adaptive step of at most `h_max`; returns the step taken.
    fn step(&mut self, h_max: f64) -> Result<f64, CoreError> {
        let len = self.y.len();
        let mut ks = vec![vec![Complex64::new(0.0, 0.0); len]; 7];
        ks[0].copy_from_slice(&self.k1);
        let mut ytmp = vec![Complex64::new(0.0, 0.0); len];
        loop {
            let h = self.h.min(h_max);
            if h < 1e-14 * self.t.abs().max(1.0) {
                return Err(CoreError::StepUnderflow { t: self.t });
            }
            for stage in 0..6 {
                for i in 0..len {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (j, kj) in ks.iter().enumerate().take(stage + 1) {
                        let a = A[stage][j];
                        if a != 0.0 {
                            acc += a * kj[i];
                        }
                    }
                    ytmp[i] = self.y[i] + h * acc;
                }
                let tstage = self.t + C[stage] * h;
                let (head, tail) = ks.split_at_mut(stage + 1);
                let _ = head;
                self.rhs.eval(tstage, &ytmp, &mut tail[0]);
            }
            // 5th-order solution is the last stage state (FSAL): ytmp now
            // holds y + h * sum a6j kj = y + h * sum b5j kj.
            let y_new = ytmp.clone();
            let mut err = vec![Complex64::new(0.0, 0.0); len];
            for i in 0..len {
                let mut acc = Complex64::new(0.0, 0.0);
                for j in 0..7 {
                    let d = B5[j] - B4[j];
                    if d != 0.0 {
                        acc += d * ks[j][i];
                    }
                }
                err[i] = h * acc;
            }
            let e = error_norm(&err, &self.y, &y_new, self.tol);
            let factor = if e > 0.0 { 0.9 * e.powf(-0.2) } else { 5.0 };
            let next = h * factor.clamp(0.2, 5.0);
            if e <= 1.0 {
                self.t += h;
                self.y = y_new;
                self.k1.copy_from_slice(&ks[6]);
                self.h = next.max(1e-14);
                let drift = (mode_norm(&self.y, self.n_modes) - 1.0).abs();
                self.norm_drift = self.norm_drift.max(drift);
                if self.norm_drift > NORM_DRIFT_LIMIT {
                    return Err(CoreError::NormDrift { drift: self.norm_drift });
                }
                return Ok(h);
            }
            self.h = next;
        }
    }
}

/// Integrate the problem to `t_end`, recording the state at each of `samples`
/// (sorted, within [0, t_end]; steps are clamped to land on them exactly).
pub fn integrate(
    problem: &PerturbationProblem,
    t_end: f64,
    tol: f64,
    samples: &[f64],
) -> Result<Trajectory, CoreError> {
    problem.validate()?;
    assert!(t_end > 0.0);
    debug_assert!(samples.windows(2).all(|w| w[0] <= w[1]), "samples must be sorted");
    let mut stepper = Stepper::new(problem, tol, (1e-3 * t_end).min(0.1));
    let mut times = Vec::with_capacity(samples.len());
    let mut states = Vec::with_capacity(samples.len());
    for &ts in samples {
        assert!((0.0..=t_end * (1.0 + 1e-12)).contains(&ts), "sample out of range");
        while stepper.t < ts - 1e-13 {
            stepper.step(ts - stepper.t)?;
        }
        times.push(ts);
        states.push(stepper.y[..stepper.n_modes].to_vec());
    }
    Ok(Trajectory { times, states, norm_drift: stepper.norm_drift })
}

/// Fixed-step integration (no adaptivity, no rejection): for convergence-order
/// measurements. Returns the final mode amplitudes.
pub fn integrate_fixed(
    problem: &PerturbationProblem,
    t_end: f64,
    n_steps: usize,
) -> Vec<Complex64> {
    let rhs = build_rhs(problem);
    let len_modes = problem.dim();
    let mut y = initial_full_state(&rhs, problem);
    let len = y.len();
    let h = t_end / n_steps as f64;
    let mut ks = vec![vec![Complex64::new(0.0, 0.0); len]; 7];
    let mut ytmp = vec![Complex64::new(0.0, 0.0); len];
    let mut t = 0.0;
    rhs.eval(t, &y, &mut ks[0]);
    for step in 0..n_steps {
        for stage in 0..6 {
            for i in 0..len {
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, kj) in ks.iter().enumerate().take(stage + 1) {
                    let a = A[stage][j];
                    if a != 0.0 {
                        acc += a * kj[i];
                    }
                }
                ytmp[i] = y[i] + h * acc;
            }
            let tstage = t + C[stage] * h;
            let (head, tail) = ks.split_at_mut(stage + 1);
            let _ = head;
            rhs.eval(tstage, &ytmp, &mut tail[0]);
        }
        y.copy_from_slice(&ytmp);
        t = t_end * (step + 1) as f64 / n_steps as f64;
        let (k7, k1) = (ks[6].clone(), &mut ks[0]);
        k1.copy_from_slice(&k7);
    }
    y[..len_modes].to_vec()
}

/// Euclidean distance between two amplitude vectors.
pub fn l2_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Largest l2 distance between the trajectory and an approximation over
/// samples with `t <= horizon`.
pub fn sup_error(
    traj: &Trajectory,
    approx: impl Fn(f64) -> Vec<Complex64>,
    horizon: f64,
) -> f64 {
    traj.times
        .iter()
        .zip(&traj.states)
        .filter(|(t, _)| **t <= horizon * (1.0 + 1e-12))
        .map(|(t, s)| l2_distance(s, &approx(*t)))
        .fold(0.0, f64::max)
}

/// Sample grid: at least `SAMPLES_PER_PERIOD` points per fastest period,
/// plus caller-supplied feature times, deduplicated and sorted.
pub fn sample_times(t_end: f64, fastest_freq: f64, features: &[f64]) -> Vec<f64> {
    let periods = t_end * fastest_freq.abs().max(1e-6) / (2.0 * std::f64::consts::PI);
    let n = ((periods * SAMPLES_PER_PERIOD).ceil() as usize).clamp(64, 400_000);
    let mut ts: Vec<f64> = (0..=n).map(|k| t_end * k as f64 / n as f64).collect();
    ts.extend(features.iter().copied().filter(|t| (0.0..=t_end).contains(t)));
    ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    ts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::CMat;
    use crate::model::{CouplingModel, SpectrumModel};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Degenerate pair with constant coupling g: exact solution
    /// c_0 = cos(eps g t), c_1 = -i sin(eps g t).
    fn rabi_problem(eps: f64, g: f64) -> PerturbationProblem {
        let mut v = CMat::zeros(2);
        v[(0, 1)] = c(g, 0.0);
        v[(1, 0)] = c(g, 0.0);
        PerturbationProblem::new(
            SpectrumModel::stationary(vec![1.0, 1.0]),
            CouplingModel::Constant(v),
            eps,
            vec![c(1.0, 0.0), c(0.0, 0.0)],
        )
        .unwrap()
    }

    #[test]
    fn reproduces_degenerate_rabi_oscillation() {
        let (eps, g) = (0.1, 1.0);
        let p = rabi_problem(eps, g);
        let t_end = 50.0;
        let samples = sample_times(t_end, eps * g, &[]);
        let traj = integrate(&p, t_end, 1e-11, &samples).unwrap();
        for (t, s) in traj.times.iter().zip(&traj.states) {
            let th = eps * g * t;
            let exact = vec![c(th.cos(), 0.0), c(0.0, -th.sin())];
            assert!(l2_distance(s, &exact) < 1e-9, "t={t}");
        }
        assert!(traj.norm_drift < 1e-10);
    }

    #[test]
    fn fixed_step_converges_at_fifth_order() {
        let p = rabi_problem(0.2, 1.0);
        let t_end = 10.0;
        let reference: Vec<Complex64> = {
            let th: f64 = 0.2 * t_end;
            vec![c(th.cos(), 0.0), c(0.0, -th.sin())]
        };
        let e1 = l2_distance(&integrate_fixed(&p, t_end, 40), &reference);
        let e2 = l2_distance(&integrate_fixed(&p, t_end, 80), &reference);
        let order = (e1 / e2).log2();
        assert!(
            (4.5..5.8).contains(&order),
            "observed order {order} (errors {e1:.3e}, {e2:.3e})"
        );
    }

    #[test]
    fn sample_clamping_hits_times_exactly() {
        let p = rabi_problem(0.1, 1.0);
        let samples = vec![0.0, 0.123456, 1.0, 4.999, 5.0];
        let traj = integrate(&p, 5.0, 1e-10, &samples).unwrap();
        assert_eq!(traj.times, samples);
    }

    #[test]
    fn csv_has_header_and_rows() {
        let p = rabi_problem(0.1, 1.0);
        let traj = integrate(&p, 1.0, 1e-10, &[0.0, 0.5, 1.0]).unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "t,re_c0,im_c0,re_c1,im_c1,norm");
        assert_eq!(lines.count(), 3);
    }
}

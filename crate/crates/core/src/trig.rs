//! Finite sums of complex exponentials `sum_j a_j exp(i nu_j t)` with real frequencies.

use num_complex::Complex64;
use rand::Rng;

/// Frequencies closer than this are merged into one term.
pub const RHO_MERGE: f64 = 1e-9;
/// Terms with amplitude magnitude below this are dropped after merging.
pub const AMP_DROP: f64 = 1e-14;

/// One complex exponential: `amplitude * exp(i frequency t)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrigTerm {
    pub amplitude: Complex64,
    pub frequency: f64,
}

/// Canonical trig sum: terms sorted by frequency, no two frequencies within
/// `RHO_MERGE`, no amplitude below `AMP_DROP`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrigSum {
    terms: Vec<TrigTerm>,
}

impl TrigSum {
    pub fn new(terms: Vec<TrigTerm>) -> Self {
        let mut s = TrigSum { terms };
        s.canonicalize();
        s
    }

    pub fn zero() -> Self {
        TrigSum { terms: Vec::new() }
    }

    /// Constant (zero-frequency) term.
    pub fn constant(a: Complex64) -> Self {
        Self::new(vec![TrigTerm { amplitude: a, frequency: 0.0 }])
    }

    pub fn term(a: Complex64, nu: f64) -> Self {
        Self::new(vec![TrigTerm { amplitude: a, frequency: nu }])
    }

    /// `amp * sin(nu t)` as two exponentials.
    pub fn sinusoid(amp: f64, nu: f64) -> Self {
        let half = Complex64::new(0.0, -amp / 2.0);
        Self::new(vec![
            TrigTerm { amplitude: half, frequency: nu },
            TrigTerm { amplitude: -half, frequency: -nu },
        ])
    }

    /// `amp * cos(nu t)` as two exponentials.
    pub fn cosine(amp: f64, nu: f64) -> Self {
        let half = Complex64::new(amp / 2.0, 0.0);
        Self::new(vec![
            TrigTerm { amplitude: half, frequency: nu },
            TrigTerm { amplitude: half, frequency: -nu },
        ])
    }

    pub fn terms(&self) -> &[TrigTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest amplitude magnitude (0 for the zero sum).
    pub fn max_amplitude(&self) -> f64 {
        self.terms.iter().map(|t| t.amplitude.norm()).fold(0.0, f64::max)
    }

    /// Largest absolute frequency present (0 for the zero sum).
    pub fn max_frequency(&self) -> f64 {
        self.terms.iter().map(|t| t.frequency.abs()).fold(0.0, f64::max)
    }

    fn canonicalize(&mut self) {
        self.terms.retain(|t| {
            assert!(
                t.amplitude.is_finite() && t.frequency.is_finite(),
                "non-finite trig term"
            );
            t.amplitude.norm() > 0.0
        });
        self.terms
            .sort_by(|a, b| a.frequency.partial_cmp(&b.frequency).unwrap());
        let mut merged: Vec<TrigTerm> = Vec::with_capacity(self.terms.len());
        for t in self.terms.drain(..) {
            match merged.last_mut() {
                Some(last) if (t.frequency - last.frequency).abs() <= RHO_MERGE => {
                    last.amplitude += t.amplitude;
                }
                _ => merged.push(t),
            }
        }
        merged.retain(|t| t.amplitude.norm() > AMP_DROP);
        self.terms = merged;
    }

    /// Pointwise value `sum_j a_j exp(i nu_j t)`.
    pub fn eval(&self, t: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|term| term.amplitude * Complex64::new(0.0, term.frequency * t).exp())
            .sum()
    }

    /// Time average: the sum of amplitudes of terms with `|nu| <= rho_dc`.
    pub fn average(&self, rho_dc: f64) -> Complex64 {
        self.terms
            .iter()
            .filter(|t| t.frequency.abs() <= rho_dc)
            .map(|t| t.amplitude)
            .sum()
    }

    /// Oscillating remainder: terms with `|nu| > rho_dc`.
    pub fn fluctuation(&self, rho_dc: f64) -> TrigSum {
        TrigSum {
            terms: self
                .terms
                .iter()
                .copied()
                .filter(|t| t.frequency.abs() > rho_dc)
                .collect(),
        }
    }

    /// Zero-mean antiderivative of the fluctuating part: each term maps to
    /// `(a / (i nu), nu)`. DC terms are removed first, so the result is the
    /// unique antiderivative with zero time average.
    pub fn brace(&self, rho_dc: f64) -> TrigSum {
        TrigSum {
            terms: self
                .terms
                .iter()
                .filter(|t| t.frequency.abs() > rho_dc)
                .map(|t| TrigTerm {
                    amplitude: t.amplitude / Complex64::new(0.0, t.frequency),
                    frequency: t.frequency,
                })
                .collect(),
        }
    }

    /// Term-by-term time derivative.
    pub fn derivative(&self) -> TrigSum {
        TrigSum::new(
            self.terms
                .iter()
                .map(|t| TrigTerm {
                    amplitude: t.amplitude * Complex64::new(0.0, t.frequency),
                    frequency: t.frequency,
                })
                .collect(),
        )
    }

    /// Exact `int_0^t` of the sum: oscillating terms integrate to
    /// `a (e^{i nu t} - 1) / (i nu)`, DC terms to `a t`.
    pub fn integral_from_zero(&self, t: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|term| {
                if term.frequency.abs() <= RHO_MERGE {
                    term.amplitude * t
                } else {
                    let inu = Complex64::new(0.0, term.frequency);
                    term.amplitude * ((inu * t).exp() - 1.0) / inu
                }
            })
            .sum()
    }

    pub fn add(&self, other: &TrigSum) -> TrigSum {
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        TrigSum::new(terms)
    }

    pub fn sub(&self, other: &TrigSum) -> TrigSum {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, a: Complex64) -> TrigSum {
        TrigSum::new(
            self.terms
                .iter()
                .map(|t| TrigTerm { amplitude: t.amplitude * a, frequency: t.frequency })
                .collect(),
        )
    }

    /// Shift every frequency by `dnu` (multiplication by `exp(i dnu t)`).
    pub fn shift_frequency(&self, dnu: f64) -> TrigSum {
        TrigSum::new(
            self.terms
                .iter()
                .map(|t| TrigTerm { amplitude: t.amplitude, frequency: t.frequency + dnu })
                .collect(),
        )
    }

    /// Product of two sums (frequencies add, amplitudes multiply).
    pub fn mul(&self, other: &TrigSum) -> TrigSum {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                terms.push(TrigTerm {
                    amplitude: a.amplitude * b.amplitude,
                    frequency: a.frequency + b.frequency,
                });
            }
        }
        TrigSum::new(terms)
    }

    /// Complex conjugate of the time-domain function: amplitudes conjugate,
    /// frequencies negate.
    pub fn adjoint(&self) -> TrigSum {
        TrigSum::new(
            self.terms
                .iter()
                .map(|t| TrigTerm { amplitude: t.amplitude.conj(), frequency: -t.frequency })
                .collect(),
        )
    }

    /// Random sum for property corpora: up to `max_terms` terms with
    /// amplitudes in the unit disk scaled by `amp` and frequencies in
    /// `[-freq, freq]` (a zero-frequency term is included half the time).
    pub fn random(rng: &mut impl Rng, max_terms: usize, amp: f64, freq: f64) -> TrigSum {
        let n = rng.gen_range(1..=max_terms);
        let mut terms: Vec<TrigTerm> = (0..n)
            .map(|_| TrigTerm {
                amplitude: Complex64::new(
                    amp * rng.gen_range(-1.0..1.0),
                    amp * rng.gen_range(-1.0..1.0),
                ),
                frequency: freq * rng.gen_range(-1.0..1.0f64),
            })
            .collect();
        if rng.gen_bool(0.5) {
            terms.push(TrigTerm {
                amplitude: Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                frequency: 0.0,
            });
        }
        TrigSum::new(terms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn merges_close_frequencies_and_drops_dust() {
        let s = TrigSum::new(vec![
            TrigTerm { amplitude: c(1.0, 0.0), frequency: 2.0 },
            TrigTerm { amplitude: c(0.5, 0.5), frequency: 2.0 + 1e-12 },
            TrigTerm { amplitude: c(1e-16, 0.0), frequency: 7.0 },
        ]);
        assert_eq!(s.terms().len(), 1);
        assert_eq!(s.terms()[0].amplitude, c(1.5, 0.5));
    }

    #[test]
    fn average_plus_fluctuation_reconstructs() {
        let s = TrigSum::new(vec![
            TrigTerm { amplitude: c(0.3, -0.2), frequency: 0.0 },
            TrigTerm { amplitude: c(1.0, 2.0), frequency: 1.5 },
            TrigTerm { amplitude: c(-0.4, 0.1), frequency: -3.0 },
        ]);
        let rho = 0.1;
        for &t in &[0.0, 0.7, 3.1, 12.9] {
            let whole = s.eval(t);
            let split = s.average(rho) + s.fluctuation(rho).eval(t);
            assert!((whole - split).norm() < 1e-14);
        }
    }

    #[test]
    fn brace_derivative_recovers_fluctuation() {
        let s = TrigSum::new(vec![
            TrigTerm { amplitude: c(0.3, -0.2), frequency: 0.0 },
            TrigTerm { amplitude: c(1.0, 2.0), frequency: 1.5 },
            TrigTerm { amplitude: c(-0.4, 0.1), frequency: -3.0 },
        ]);
        let rho = 0.1;
        let db = s.brace(rho).derivative();
        let fl = s.fluctuation(rho);
        for &t in &[0.0, 0.4, 2.2] {
            assert!((db.eval(t) - fl.eval(t)).norm() < 1e-14);
        }
        // The brace itself has zero average.
        assert!(s.brace(rho).average(rho).norm() < 1e-15);
    }

    #[test]
    fn product_is_pointwise() {
        let a = TrigSum::sinusoid(0.7, 2.0);
        let b = TrigSum::cosine(1.3, 0.5).add(&TrigSum::constant(c(0.2, -0.1)));
        let p = a.mul(&b);
        for &t in &[0.0, 0.3, 1.9, 8.4] {
            assert!((p.eval(t) - a.eval(t) * b.eval(t)).norm() < 1e-14);
        }
    }

    #[test]
    fn integral_from_zero_matches_brace_difference() {
        // int_0^t f = <f> t + {f}(t) - {f}(0) when the DC split is exact.
        let s = TrigSum::new(vec![
            TrigTerm { amplitude: c(0.5, 0.1), frequency: 0.0 },
            TrigTerm { amplitude: c(1.0, -1.0), frequency: 2.0 },
        ]);
        let rho = 1e-9;
        for &t in &[0.5, 4.0] {
            let direct = s.integral_from_zero(t);
            let via = s.average(rho) * t + s.brace(rho).eval(t) - s.brace(rho).eval(0.0);
            assert!((direct - via).norm() < 1e-14);
        }
    }

    #[test]
    fn adjoint_is_pointwise_conjugate_and_involutive() {
        let s = TrigSum::new(vec![
            TrigTerm { amplitude: c(1.0, 2.0), frequency: 1.5 },
            TrigTerm { amplitude: c(-0.4, 0.1), frequency: -3.0 },
        ]);
        for &t in &[0.0, 0.9, 5.5] {
            assert!((s.adjoint().eval(t) - s.eval(t).conj()).norm() < 1e-14);
        }
        assert_eq!(s.adjoint().adjoint(), s);
    }

    #[test]
    fn sinusoid_and_cosine_eval() {
        let s = TrigSum::sinusoid(2.0, 3.0);
        let co = TrigSum::cosine(0.5, 1.2);
        for &t in &[0.0, 0.7, 2.0] {
            assert!((s.eval(t) - c(2.0 * (3.0 * t).sin(), 0.0)).norm() < 1e-14);
            assert!((co.eval(t) - c(0.5 * (1.2 * t).cos(), 0.0)).norm() < 1e-14);
        }
    }
}

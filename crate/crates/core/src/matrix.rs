//! Sparse matrices of trig sums and the small dense complex matrices their
//! averages collapse to.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::CoreError;
use crate::trig::TrigSum;

/// Dense row-major complex matrix, small (mode counts are tens at most).
#[derive(Clone, Debug, PartialEq)]
pub struct CMat {
    dim: usize,
    data: Vec<Complex64>,
}

impl CMat {
    pub fn zeros(dim: usize) -> Self {
        CMat { dim, data: vec![Complex64::new(0.0, 0.0); dim * dim] }
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = CMat::zeros(dim);
        for r in 0..dim {
            for c in 0..dim {
                m[(r, c)] = f(r, c);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|r| (0..self.dim).map(|c| self[(r, c)] * v[c]).sum())
            .collect()
    }

    pub fn scale(&self, a: Complex64) -> CMat {
        CMat { dim: self.dim, data: self.data.iter().map(|x| x * a).collect() }
    }

    /// Largest magnitude among off-diagonal entries.
    pub fn max_off_diagonal(&self) -> f64 {
        let mut m = 0.0f64;
        for r in 0..self.dim {
            for c in 0..self.dim {
                if r != c {
                    m = m.max(self[(r, c)].norm());
                }
            }
        }
        m
    }

    /// Largest deviation from Hermitian symmetry.
    pub fn hermitian_defect(&self) -> f64 {
        let mut m = 0.0f64;
        for r in 0..self.dim {
            for c in 0..self.dim {
                m = m.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        m
    }
}

impl std::ops::Index<(usize, usize)> for CMat {
    type Output = Complex64;
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.dim + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.dim + c]
    }
}

/// Square matrix whose entries are trig sums; the workhorse carrying the
/// interaction-frame coupling `W(t)` and everything derived from it.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct HarmonicMatrix {
    dim: usize,
    entries: BTreeMap<(usize, usize), TrigSum>,
}

impl HarmonicMatrix {
    pub fn new(dim: usize) -> Self {
        HarmonicMatrix { dim, entries: BTreeMap::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn set(&mut self, r: usize, c: usize, s: TrigSum) {
        assert!(r < self.dim && c < self.dim, "index out of range");
        if s.is_zero() {
            self.entries.remove(&(r, c));
        } else {
            self.entries.insert((r, c), s);
        }
    }

    pub fn get(&self, r: usize, c: usize) -> TrigSum {
        self.entries.get(&(r, c)).cloned().unwrap_or_else(TrigSum::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(usize, usize), &TrigSum)> {
        self.entries.iter()
    }

    /// Largest absolute frequency over all entries.
    pub fn max_frequency(&self) -> f64 {
        self.entries.values().map(|s| s.max_frequency()).fold(0.0, f64::max)
    }

    pub fn eval(&self, t: f64) -> CMat {
        let mut m = CMat::zeros(self.dim);
        for (&(r, c), s) in &self.entries {
            m[(r, c)] = s.eval(t);
        }
        m
    }

    /// Sparse matrix-vector product at time `t`.
    pub fn apply(&self, t: f64, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim);
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim];
        for (&(r, c), s) in &self.entries {
            out[r] += s.eval(t) * v[c];
        }
        out
    }

    /// Entrywise time average.
    pub fn average(&self, rho_dc: f64) -> CMat {
        let mut m = CMat::zeros(self.dim);
        for (&(r, c), s) in &self.entries {
            m[(r, c)] = s.average(rho_dc);
        }
        m
    }

    /// Entrywise oscillating part.
    pub fn fluctuation(&self, rho_dc: f64) -> HarmonicMatrix {
        self.map(|s| s.fluctuation(rho_dc))
    }

    /// Entrywise zero-mean antiderivative of the oscillating part.
    pub fn brace(&self, rho_dc: f64) -> HarmonicMatrix {
        self.map(|s| s.brace(rho_dc))
    }

    pub fn scale(&self, a: Complex64) -> HarmonicMatrix {
        self.map(|s| s.scale(a))
    }

    pub fn add(&self, other: &HarmonicMatrix) -> Result<HarmonicMatrix, CoreError> {
        if self.dim != other.dim {
            return Err(CoreError::DimensionMismatch { expected: self.dim, got: other.dim });
        }
        let mut out = self.clone();
        for (&(r, c), s) in &other.entries {
            out.set(r, c, out.get(r, c).add(s));
        }
        Ok(out)
    }

    /// Matrix product; entry frequencies add pairwise.
    pub fn mul(&self, other: &HarmonicMatrix) -> Result<HarmonicMatrix, CoreError> {
        if self.dim != other.dim {
            return Err(CoreError::DimensionMismatch { expected: self.dim, got: other.dim });
        }
        let mut out = HarmonicMatrix::new(self.dim);
        for (&(r, k), a) in &self.entries {
            for c in 0..other.dim {
                if let Some(b) = other.entries.get(&(k, c)) {
                    let prod = a.mul(b);
                    if !prod.is_zero() {
                        out.set(r, c, out.get(r, c).add(&prod));
                    }
                }
            }
        }
        Ok(out)
    }

    /// Conjugate transpose of the time-domain matrix function.
    pub fn adjoint(&self) -> HarmonicMatrix {
        let mut out = HarmonicMatrix::new(self.dim);
        for (&(r, c), s) in &self.entries {
            out.set(c, r, s.adjoint());
        }
        out
    }

    /// Largest amplitude among the entries of `self - self.adjoint()`;
    /// zero for an exactly Hermitian matrix function.
    pub fn hermitian_defect(&self) -> f64 {
        let mut defect = 0.0f64;
        let adj = self.adjoint();
        let keys: Vec<(usize, usize)> =
            self.entries.keys().chain(adj.entries.keys()).copied().collect();
        for (r, c) in keys {
            defect = defect.max(self.get(r, c).sub(&adj.get(r, c)).max_amplitude());
        }
        defect
    }

    fn map(&self, f: impl Fn(&TrigSum) -> TrigSum) -> HarmonicMatrix {
        let mut out = HarmonicMatrix::new(self.dim);
        for (&(r, c), s) in &self.entries {
            out.set(r, c, f(s));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trig::TrigTerm;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sample() -> HarmonicMatrix {
        let mut m = HarmonicMatrix::new(2);
        m.set(0, 1, TrigSum::term(c(0.5, -0.25), -1.0));
        m.set(1, 0, TrigSum::term(c(0.5, 0.25), 1.0));
        m.set(0, 0, TrigSum::new(vec![
            TrigTerm { amplitude: c(0.1, 0.0), frequency: 0.0 },
            TrigTerm { amplitude: c(0.2, 0.0), frequency: 2.0 },
            TrigTerm { amplitude: c(0.2, 0.0), frequency: -2.0 },
        ]));
        m
    }

    #[test]
    fn hermitian_sample_has_no_defect() {
        assert!(sample().hermitian_defect() < 1e-15);
    }

    #[test]
    fn product_is_pointwise() {
        let m = sample();
        let p = m.mul(&m).unwrap();
        for &t in &[0.0, 0.9, 3.3] {
            let a = m.eval(t);
            let direct = p.eval(t);
            for r in 0..2 {
                for cc in 0..2 {
                    let manual: Complex64 = (0..2).map(|k| a[(r, k)] * a[(k, cc)]).sum();
                    assert!((direct[(r, cc)] - manual).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn adjoint_reverses_products() {
        let m = sample();
        let mut n = HarmonicMatrix::new(2);
        n.set(0, 1, TrigSum::sinusoid(0.7, 0.4));
        n.set(1, 1, TrigSum::constant(c(0.0, 1.0)));
        let lhs = m.mul(&n).unwrap().adjoint();
        let rhs = n.adjoint().mul(&m.adjoint()).unwrap();
        for &t in &[0.0, 1.7] {
            let (a, b) = (lhs.eval(t), rhs.eval(t));
            for r in 0..2 {
                for cc in 0..2 {
                    assert!((a[(r, cc)] - b[(r, cc)]).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let m = sample();
        let n = HarmonicMatrix::new(3);
        assert!(matches!(m.mul(&n), Err(CoreError::DimensionMismatch { .. })));
    }

    #[test]
    fn average_extracts_dc() {
        let m = sample();
        let avg = m.average(1e-9);
        assert!((avg[(0, 0)] - c(0.1, 0.0)).norm() < 1e-15);
        assert!(avg[(0, 1)].norm() < 1e-15);
    }
}

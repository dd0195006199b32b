//! Orthonormal Hermite-function basis and Gauss-Hermite quadrature.

use num_complex::Complex64;

/// Physicists' Hermite polynomial H_n(x) by the three-term recurrence.
/// Grows like n!, fine for the small n used in tests; prefer
/// [`eigenfunction`] for anything normalized.
pub fn hermite_poly(n: usize, x: f64) -> f64 {
    let (mut h0, mut h1) = (1.0, 2.0 * x);
    match n {
        0 => h0,
        1 => h1,
        _ => {
            for k in 1..n {
                let h2 = 2.0 * x * h1 - 2.0 * k as f64 * h0;
                h0 = h1;
                h1 = h2;
            }
            h1
        }
    }
}

/// Orthonormal oscillator eigenfunction `psi_n(x - shift)`:
/// `(2^n n! sqrt(pi))^{-1/2} H_n(y) e^{-y^2/2}` with the normalization folded
/// into the recurrence so large n stays stable.
pub fn eigenfunction(n: usize, x: f64, shift: f64) -> f64 {
    let y = x - shift;
    let mut h0 = std::f64::consts::PI.powf(-0.25) * (-0.5 * y * y).exp();
    if n == 0 {
        return h0;
    }
    let mut h1 = std::f64::consts::SQRT_2 * y * h0;
    for k in 1..n {
        let kf = k as f64;
        let h2 = (2.0 / (kf + 1.0)).sqrt() * y * h1 - (kf / (kf + 1.0)).sqrt() * h0;
        h0 = h1;
        h1 = h2;
    }
    h1
}

/// Evaluation helper for a fixed truncation and center.
#[derive(Clone, Debug)]
pub struct HermiteBasis {
    pub n_modes: usize,
    pub shift: f64,
}

impl HermiteBasis {
    pub fn new(n_modes: usize, shift: f64) -> Self {
        HermiteBasis { n_modes, shift }
    }

    pub fn value(&self, n: usize, x: f64) -> f64 {
        eigenfunction(n, x, self.shift)
    }

    /// All mode values at one point (single recurrence sweep).
    pub fn values(&self, x: f64) -> Vec<f64> {
        let y = x - self.shift;
        let mut vals = Vec::with_capacity(self.n_modes);
        let mut h0 = std::f64::consts::PI.powf(-0.25) * (-0.5 * y * y).exp();
        vals.push(h0);
        if self.n_modes > 1 {
            let mut h1 = std::f64::consts::SQRT_2 * y * h0;
            vals.push(h1);
            for k in 1..self.n_modes - 1 {
                let kf = k as f64;
                let h2 = (2.0 / (kf + 1.0)).sqrt() * y * h1 - (kf / (kf + 1.0)).sqrt() * h0;
                h0 = h1;
                h1 = h2;
                vals.push(h1);
            }
        }
        vals
    }

    /// Superposition `sum_n c_n psi_n(x - shift)`.
    pub fn superposition(&self, coeffs: &[Complex64], x: f64) -> Complex64 {
        self.values(x)
            .iter()
            .zip(coeffs)
            .map(|(&v, &c)| c * v)
            .sum()
    }
}

/// Gauss-Hermite nodes and weights for `int e^{-x^2} g(x) dx ~ sum w_i g(x_i)`,
/// by Golub-Welsch: eigenvalues of the symmetric tridiagonal Jacobi matrix with
/// off-diagonal sqrt(k/2), weights sqrt(pi) times the squared first eigenvector
/// components. Exact for polynomials up to degree 2n - 1.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let jacobi = nalgebra::DMatrix::<f64>::from_fn(n, n, |r, c| {
        if r + 1 == c {
            (c as f64 / 2.0).sqrt()
        } else if c + 1 == r {
            (r as f64 / 2.0).sqrt()
        } else {
            0.0
        }
    });
    let eig = nalgebra::SymmetricEigen::new(jacobi);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let node = eig.eigenvalues[k];
            let v0 = eig.eigenvectors[(0, k)];
            (node, std::f64::consts::PI.sqrt() * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    pairs.into_iter().unzip()
}

/// `int e^{-(x-center)^2} g(x) dx ~ sum w_i g(center + y_i)`: Gauss-Hermite
/// recentered at `center`. The caller factors the integrand as a unit-width
/// Gaussian at `center` times a smooth `g` (for basis-function products the
/// natural center is the midpoint of the two shifts).
pub fn gh_integrate(
    n: usize,
    center: f64,
    mut g: impl FnMut(f64) -> Complex64,
) -> Complex64 {
    let (nodes, weights) = gauss_hermite(n);
    nodes
        .iter()
        .zip(&weights)
        .map(|(&y, &w)| w * g(y + center))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_point_rule_is_the_classical_one() {
        let (nodes, weights) = gauss_hermite(3);
        let x = (1.5f64).sqrt();
        let sp = std::f64::consts::PI.sqrt();
        assert!((nodes[0] + x).abs() < 1e-12);
        assert!(nodes[1].abs() < 1e-12);
        assert!((nodes[2] - x).abs() < 1e-12);
        assert!((weights[0] - sp / 6.0).abs() < 1e-12);
        assert!((weights[1] - 2.0 * sp / 3.0).abs() < 1e-12);
        assert!((weights[2] - sp / 6.0).abs() < 1e-12);
    }

    #[test]
    fn integrates_even_moments_exactly() {
        // int e^{-x^2} x^4 dx = (3/4) sqrt(pi)
        let (nodes, weights) = gauss_hermite(6);
        let v: f64 = nodes.iter().zip(&weights).map(|(&x, &w)| w * x.powi(4)).sum();
        assert!((v - 0.75 * std::f64::consts::PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn eigenfunctions_are_orthonormal() {
        // psi_m psi_n = e^{-x^2} * polynomial: a 2N-node rule is exact.
        let nn = 12usize;
        let basis = HermiteBasis::new(nn, 0.0);
        for m in 0..nn {
            for n in 0..nn {
                let overlap = gh_integrate(2 * nn + 8, 0.0, |x| {
                    // Divide out the Gaussian weight the quadrature assumes:
                    // psi_m psi_n e^{x^2} is a pure polynomial product.
                    let vals = basis.values(x);
                    Complex64::new(vals[m] * vals[n] * (x * x).exp(), 0.0)
                });
                let expect = if m == n { 1.0 } else { 0.0 };
                assert!(
                    (overlap.re - expect).abs() < 1e-8,
                    "overlap({m},{n}) = {}",
                    overlap.re
                );
            }
        }
    }

    #[test]
    fn normalized_recurrence_matches_raw_polynomial() {
        for n in 0..10 {
            for &x in &[-1.3, 0.0, 0.8, 2.4] {
                let norm = (2f64.powi(n as i32)
                    * (1..=n).map(|k| k as f64).product::<f64>()
                    * std::f64::consts::PI.sqrt())
                .sqrt();
                let direct = hermite_poly(n, x) * (-0.5 * x * x).exp() / norm;
                assert!((eigenfunction(n, x, 0.0) - direct).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn shift_moves_the_center() {
        assert!((eigenfunction(0, 1.7, 1.7) - eigenfunction(0, 0.0, 0.0)).abs() < 1e-14);
    }
}

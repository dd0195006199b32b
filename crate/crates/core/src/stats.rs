//! Least-squares fits for convergence orders and phase slopes.

use crate::error::CoreError;

/// Minimum spread in the abscissa before a fit is meaningful.
const SPREAD_FLOOR: f64 = 1e-12;

/// Ordinary least squares y = slope * x + intercept.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64), CoreError> {
    assert_eq!(x.len(), y.len(), "mismatched fit inputs");
    let n = x.len();
    if n < 2 {
        return Err(CoreError::DegenerateFit);
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(u, v)| (u - mx) * (v - my)).sum();
    if sxx < SPREAD_FLOOR * nf {
        return Err(CoreError::DegenerateFit);
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// Convergence order from an (epsilon, error) table: the log-log slope.
/// Needs at least three points and strictly positive data.
pub fn fit_order(eps: &[f64], err: &[f64]) -> Result<f64, CoreError> {
    assert_eq!(eps.len(), err.len(), "mismatched fit inputs");
    if eps.len() < 3 || eps.iter().chain(err).any(|&v| !(v > 0.0)) {
        return Err(CoreError::DegenerateFit);
    }
    let lx: Vec<f64> = eps.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = err.iter().map(|v| v.ln()).collect();
    Ok(linear_fit(&lx, &ly)?.0)
}

/// Remove 2 pi jumps from a sampled phase sequence so that consecutive
/// differences stay within (-pi, pi].
pub fn unwrap_phase(phases: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(phases.len());
    let mut offset = 0.0;
    for (k, &p) in phases.iter().enumerate() {
        if k > 0 {
            let prev: f64 = out[k - 1];
            let mut jump: f64 = p + offset - prev;
            while jump > std::f64::consts::PI {
                offset -= 2.0 * std::f64::consts::PI;
                jump = p + offset - prev;
            }
            while jump <= -std::f64::consts::PI {
                offset += 2.0 * std::f64::consts::PI;
                jump = p + offset - prev;
            }
        }
        out.push(p + offset);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_fit_recovers_exact_line() {
        let x = [0.0, 1.0, 2.0, 5.0];
        let y: Vec<f64> = x.iter().map(|v| -0.3 * v + 2.0).collect();
        let (slope, intercept) = linear_fit(&x, &y).unwrap();
        assert!((slope + 0.3).abs() < 1e-14);
        assert!((intercept - 2.0).abs() < 1e-14);
    }

    #[test]
    fn fit_order_recovers_power_law() {
        let eps = [0.2, 0.1, 0.05, 0.025];
        let err: Vec<f64> = eps.iter().map(|e| 3.0 * e * e).collect();
        assert!((fit_order(&eps, &err).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_inputs_are_refused() {
        assert!(matches!(fit_order(&[0.1, 0.2], &[1.0, 2.0]), Err(CoreError::DegenerateFit)));
        assert!(matches!(
            fit_order(&[0.1, 0.1, 0.1], &[1.0, 2.0, 3.0]),
            Err(CoreError::DegenerateFit)
        ));
        assert!(matches!(
            fit_order(&[0.1, 0.2, 0.4], &[1.0, 0.0, 3.0]),
            Err(CoreError::DegenerateFit)
        ));
        assert!(matches!(linear_fit(&[1.0], &[1.0]), Err(CoreError::DegenerateFit)));
    }

    #[test]
    fn unwrap_follows_winding_phase() {
        let slope = -0.7;
        let raw: Vec<f64> = (0..200)
            .map(|k| {
                let t = k as f64 * 0.25;
                let p: f64 = slope * t;
                p.sin().atan2(p.cos())
            })
            .collect();
        let un = unwrap_phase(&raw);
        for (k, u) in un.iter().enumerate() {
            assert!((u - slope * (k as f64 * 0.25)).abs() < 1e-12, "k={k}");
        }
    }
}

//! Parameter sweeps over independent solver runs. With the `parallel`
//! feature the points run on the rayon pool; order of results always
//! matches the order of inputs.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Run `job` at every value, in input order.
#[cfg(feature = "parallel")]
pub fn run_sweep<T, F>(values: &[f64], job: F) -> Vec<T>
where
    T: Send,
    F: Fn(f64) -> T + Sync,
{
    values.par_iter().map(|&v| job(v)).collect()
}

/// Run `job` at every value, in input order.
#[cfg(not(feature = "parallel"))]
pub fn run_sweep<T, F>(values: &[f64], job: F) -> Vec<T>
where
    T: Send,
    F: Fn(f64) -> T + Sync,
{
    run_sweep_sequential(values, job)
}

/// Sequential reference path, kept unconditionally for benchmarks and for
/// checking that parallel dispatch changes nothing.
pub fn run_sweep_sequential<T, F>(values: &[f64], job: F) -> Vec<T>
where
    T: Send,
    F: Fn(f64) -> T + Sync,
{
    values.iter().map(|&v| job(v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn results_keep_input_order() {
        let values: Vec<f64> = (0..64).map(|k| k as f64 * 0.5).collect();
        let out = run_sweep(&values, |v| v * v);
        let seq = run_sweep_sequential(&values, |v| v * v);
        assert_eq!(out, seq);
        for (v, o) in values.iter().zip(&out) {
            assert_eq!(*o, v * v);
        }
    }
}

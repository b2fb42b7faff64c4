//! Composite Simpson quadrature on a uniform grid, plus the Simpson Gram
//! kernel used to integrate squared moduli of exponential sums without
//! sampling them.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::grid::TauGrid;

/// Composite Simpson rule over equally spaced samples. Needs an odd number
/// of samples (even number of intervals), at least three.
pub fn simpson(samples: &[f64], step: f64) -> Result<f64> {
    let len = samples.len();
    if len < 3 || len.is_multiple_of(2) {
        return Err(Error::GridMismatch(format!(
            "composite Simpson needs an even number of intervals, got {}",
            len.saturating_sub(1)
        )));
    }
    let last = len - 1;
    let mut odd = 0.0;
    let mut even = 0.0;
    for (s, &f) in samples.iter().enumerate().take(last).skip(1) {
        if s % 2 == 1 {
            odd += f;
        } else {
            even += f;
        }
    }
    Ok(step / 3.0 * (samples[0] + 4.0 * odd + 2.0 * even + samples[last]))
}

/// Real Simpson Gram matrix of a set of angular frequencies:
///
/// ```text
/// K[q][r] = Re sum_s w_s exp(i (w_q - w_r) tau_s)
/// ```
///
/// with `w_s` the composite Simpson weights of `grid`. For any real
/// coefficient vector `c`, `c^T K c` equals the Simpson approximation of
/// `int |sum_q c_q exp(-i w_q tau)|^2 dtau` on that grid, exactly up to
/// rounding. Each entry is a closed-form geometric sum, so the cost does not
/// depend on the number of grid points.
pub fn simpson_gram(frequencies: &[f64], grid: &TauGrid) -> Result<DMatrix<f64>> {
    if !grid.is_simpson_compatible() {
        return Err(Error::GridMismatch(format!(
            "composite Simpson needs an even number of intervals, got {}",
            grid.intervals()
        )));
    }
    let n = frequencies.len();
    let step = grid.step();
    let intervals = grid.intervals();
    let mut gram = DMatrix::zeros(n, n);
    for q in 0..n {
        gram[(q, q)] = grid.horizon();
        for r in (q + 1)..n {
            let theta = (frequencies[q] - frequencies[r]) * step;
            let value = simpson_cosine_sum(theta, intervals) * step / 3.0;
            gram[(q, r)] = value;
            gram[(r, q)] = value;
        }
    }
    Ok(gram)
}

/// `sum_s v_s cos(theta s)` with Simpson pattern `v = 1, 4, 2, 4, ..., 4, 1`
/// over `intervals + 1` points.
fn simpson_cosine_sum(theta: f64, intervals: usize) -> f64 {
    let s = intervals as f64;
    let half_sin = (0.5 * theta).sin();
    let sin = theta.sin();
    if half_sin == 0.0 || sin == 0.0 {
        // theta on a multiple of pi (in practice exactly zero): sum directly
        return (0..=intervals)
            .map(|k| {
                let weight = if k == 0 || k == intervals {
                    1.0
                } else if k % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                weight * (theta * k as f64).cos()
            })
            .sum();
    }
    // sum_{s=0}^{S} cos(theta s)
    let all = (0.5 * theta * s).cos() * (0.5 * theta * (s + 1.0)).sin() / half_sin;
    // sum over odd s < S of cos(theta s)
    let odd = (theta * s).sin() / (2.0 * sin);
    2.0 * all + 2.0 * odd - 1.0 - (theta * s).cos()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn simpson_is_exact_for_cubics() {
        let step = 0.25;
        let samples: Vec<f64> = (0..=8)
            .map(|s| {
                let x = s as f64 * step;
                x * x * x - 2.0 * x + 1.0
            })
            .collect();
        // int_0^2 (x^3 - 2x + 1) dx = 4 - 4 + 2
        assert_relative_eq!(simpson(&samples, step).unwrap(), 2.0, epsilon = 1e-14);
    }

    #[test]
    fn simpson_rejects_odd_interval_count() {
        assert!(simpson(&[1.0, 2.0], 0.1).is_err());
        assert!(simpson(&[1.0, 2.0, 3.0, 4.0], 0.1).is_err());
        assert!(simpson(&[1.0], 0.1).is_err());
    }

    #[test]
    fn gram_matches_sampled_simpson() {
        let grid = TauGrid::simpson(17.3, 0.05).unwrap();
        let freqs = [-1.1, -0.4, 0.0, 0.0, 1e-13, 0.37, 0.9, 1.2];
        let gram = simpson_gram(&freqs, &grid).unwrap();
        for q in 0..freqs.len() {
            for r in 0..freqs.len() {
                let samples: Vec<f64> = grid
                    .taus()
                    .map(|t| ((freqs[q] - freqs[r]) * t).cos())
                    .collect();
                let direct = simpson(&samples, grid.step()).unwrap();
                assert!(
                    (gram[(q, r)] - direct).abs() < 1e-10,
                    "({q},{r}): {} vs {direct}",
                    gram[(q, r)]
                );
            }
        }
    }

    #[test]
    fn gram_quadratic_form_integrates_exponential_sum() {
        let grid = TauGrid::simpson(12.0, 0.05).unwrap();
        let freqs = [-0.8, 0.15, 0.6];
        let coeffs = [0.3, -0.7, 0.45];
        let gram = simpson_gram(&freqs, &grid).unwrap();
        let c = nalgebra::DVector::from_column_slice(&coeffs);
        let form = (c.transpose() * &gram * &c)[(0, 0)];
        let samples: Vec<f64> = grid
            .taus()
            .map(|t| {
                let (re, im) = freqs
                    .iter()
                    .zip(&coeffs)
                    .fold((0.0, 0.0), |(re, im), (w, c)| {
                        (re + c * (w * t).cos(), im - c * (w * t).sin())
                    });
                re * re + im * im
            })
            .collect();
        assert_relative_eq!(
            form,
            simpson(&samples, grid.step()).unwrap(),
            max_relative = 1e-12
        );
    }
}

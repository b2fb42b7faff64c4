//! Least-squares fit of `alpha_c(N) ~ a ln(N - b) + c`.
//!
//! The model is linear in `(a, c)` once `b` is fixed, so the fit is a
//! one-dimensional search over `b` with a closed-form linear solve inside.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_POINTS: usize = 4;

// Distance kept between b and the smallest N.
const B_MARGIN: f64 = 0.5;
const COARSE_SAMPLES: usize = 400;
const B_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogFit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub sse: f64,
    pub n_points: usize,
    pub n_max: usize,
}

impl LogFit {
    pub fn predict(&self, n: f64) -> f64 {
        self.a * (n - self.b).ln() + self.c
    }

    /// Sum of squared residuals of arbitrary parameters on `points`.
    pub fn sse_at(points: &[(usize, f64)], a: f64, b: f64, c: f64) -> f64 {
        points
            .iter()
            .map(|&(n, y)| {
                let r = y - a * (n as f64 - b).ln() - c;
                r * r
            })
            .sum()
    }
}

#[derive(Clone, Copy, Debug)]
struct LinearFit {
    a: f64,
    c: f64,
    sse: f64,
}

fn linear_fit(points: &[(usize, f64)], b: f64) -> LinearFit {
    let count = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|&(n, _)| (n as f64 - b).ln()).collect();
    let x_mean = xs.iter().sum::<f64>() / count;
    let y_mean = points.iter().map(|&(_, y)| y).sum::<f64>() / count;
    let (sxx, sxy) = xs
        .iter()
        .zip(points)
        .fold((0.0, 0.0), |(sxx, sxy), (&x, &(_, y))| {
            let dx = x - x_mean;
            (sxx + dx * dx, sxy + dx * (y - y_mean))
        });
    let a = sxy / sxx;
    let c = y_mean - a * x_mean;
    let sse = xs
        .iter()
        .zip(points)
        .map(|(&x, &(_, y))| {
            let r = y - a * x - c;
            r * r
        })
        .sum();
    LinearFit { a, c, sse }
}

pub fn fit_log(points: &[(usize, f64)]) -> Result<LogFit> {
    if points.len() < MIN_POINTS {
        return Err(Error::InsufficientPoints {
            found: points.len(),
            required: MIN_POINTS,
        });
    }
    if let Some(&(n, _)) = points.iter().find(|&&(n, _)| n < 2) {
        return Err(Error::InvalidParameter(format!(
            "chain lengths must be at least 2, got {n}"
        )));
    }
    if let Some(&(_, y)) = points.iter().find(|&&(_, y)| !y.is_finite()) {
        return Err(Error::InvalidParameter(format!("non-finite value {y}")));
    }
    let mut ns: Vec<usize> = points.iter().map(|&(n, _)| n).collect();
    ns.sort_unstable();
    if ns.first() == ns.last() {
        return Err(Error::DegenerateDesign(
            "all chain lengths are equal".into(),
        ));
    }
    if ns.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::DegenerateDesign(
            "chain lengths must be distinct".into(),
        ));
    }
    let n_min = ns[0] as f64;
    let n_max = *ns.last().expect("non-empty");

    let upper = n_min - B_MARGIN;
    let sse = |b: f64| linear_fit(points, b).sse;

    // coarse scan for the basin, then golden section inside it
    let at = |i: usize| upper * i as f64 / COARSE_SAMPLES as f64;
    let best = (0..=COARSE_SAMPLES)
        .map(|i| (i, sse(at(i))))
        .fold(
            (0, f64::INFINITY),
            |acc, cur| if cur.1 < acc.1 { cur } else { acc },
        )
        .0;
    let mut lo = at(best.saturating_sub(1));
    let mut hi = at((best + 1).min(COARSE_SAMPLES));

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = sse(x1);
    let mut f2 = sse(x2);
    while hi - lo > B_TOLERANCE {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = sse(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = sse(x2);
        }
    }
    let b = 0.5 * (lo + hi);
    let fit = linear_fit(points, b);
    Ok(LogFit {
        a: fit.a,
        b,
        c: fit.c,
        sse: fit.sse,
        n_points: points.len(),
        n_max,
    })
}

/// Refits on `N <= N_max` for each cutoff in `nmax_grid`.
pub fn a_vs_nmax(points: &[(usize, f64)], nmax_grid: &[usize]) -> Result<Vec<(usize, LogFit)>> {
    nmax_grid
        .iter()
        .map(|&n_max| {
            let subset: Vec<(usize, f64)> = points
                .iter()
                .copied()
                .filter(|&(n, _)| n <= n_max)
                .collect();
            fit_log(&subset).map(|fit| (n_max, fit))
        })
        .collect()
}

//! Relative discrepancy between the nearest-neighbour (`M = 1`) and full
//! (`M = N - 1`) evolutions of a signal:
//!
//! ```text
//! dJ(F) = sqrt( int_0^T |F_full - F_nni|^2 dtau / int_0^T |F_full|^2 dtau )
//! ```
//!
//! Integrals use composite Simpson on a uniform grid. Single signals are
//! sampled directly; the all-pairs maximum goes through the Simpson Gram
//! kernel, which yields the same Simpson sums without sampling the `N^2`
//! amplitudes.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::chain::{check_site, ChainSpec};
use crate::error::{Error, Result};
use crate::grid::TauGrid;
use crate::propagator::{AmplitudeSeries, DecompositionCache, SpectralDecomposition};
use crate::quadrature::{simpson, simpson_gram};

/// Default time step of the quadrature grid.
pub const DEFAULT_TAU_STEP: f64 = 0.05;

/// Smallest reference integral accepted before the ratio is declared degenerate.
pub const MIN_DENOMINATOR_SQ: f64 = 1e-300;

// Relative slack under which two pair discrepancies count as tied.
const TIE_RELATIVE: f64 = 1e-12;

/// Acceptance threshold `epsilon` of the discrepancy criterion.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Tolerance(f64);

impl Tolerance {
    pub const DEFAULT: f64 = 0.01;

    pub fn new(epsilon: f64) -> Result<Self> {
        if epsilon > 0.0 && epsilon < 1.0 {
            Ok(Self(epsilon))
        } else {
            Err(Error::InvalidParameter(format!(
                "tolerance must lie in (0, 1), got {epsilon}"
            )))
        }
    }

    pub fn value(&self) -> f64 {
        self.0
    }

    /// Whether a discrepancy value satisfies `value < epsilon`.
    pub fn accepts(&self, value: f64) -> bool {
        value < self.0
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self(Self::DEFAULT)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DiscrepancyResult {
    pub value: f64,
    pub numerator_sq: f64,
    pub denominator_sq: f64,
    pub horizon: f64,
    pub pair: Option<(usize, usize)>,
}

impl DiscrepancyResult {
    fn from_integrals(
        numerator_sq: f64,
        denominator_sq: f64,
        horizon: f64,
        pair: Option<(usize, usize)>,
    ) -> Result<Self> {
        if denominator_sq.is_nan() || denominator_sq < MIN_DENOMINATOR_SQ {
            return Err(Error::DegenerateSignal { denominator_sq });
        }
        let numerator_sq = numerator_sq.max(0.0);
        Ok(Self {
            value: (numerator_sq / denominator_sq).sqrt(),
            numerator_sq,
            denominator_sq,
            horizon,
            pair,
        })
    }
}

/// `|f_full - f_nni| / |f_full|` at a single instant.
pub fn pointwise_discrepancy(f_full: Complex64, f_nni: Complex64) -> Result<f64> {
    let reference = f_full.norm();
    if reference == 0.0 {
        return Err(Error::ZeroReference);
    }
    Ok((f_full - f_nni).norm() / reference)
}

/// Integral discrepancy of two signals sampled on the same Simpson grid.
pub fn delta_j(
    signal_full: &[Complex64],
    signal_nni: &[Complex64],
    grid: &TauGrid,
) -> Result<DiscrepancyResult> {
    if signal_full.len() != grid.len() || signal_nni.len() != grid.len() {
        return Err(Error::GridMismatch(format!(
            "grid has {} points, signals have {} and {}",
            grid.len(),
            signal_full.len(),
            signal_nni.len()
        )));
    }
    if !grid.is_simpson_compatible() {
        return Err(Error::GridMismatch(format!(
            "composite Simpson needs an even number of intervals, got {}",
            grid.intervals()
        )));
    }
    let diff: Vec<f64> = signal_full
        .iter()
        .zip(signal_nni)
        .map(|(a, b)| (a - b).norm_sqr())
        .collect();
    let reference: Vec<f64> = signal_full.iter().map(|a| a.norm_sqr()).collect();
    DiscrepancyResult::from_integrals(
        simpson(&diff, grid.step())?,
        simpson(&reference, grid.step())?,
        grid.horizon(),
        None,
    )
}

/// [`delta_j`] on two amplitude series; their grids and pair must agree.
pub fn delta_j_series(full: &AmplitudeSeries, nni: &AmplitudeSeries) -> Result<DiscrepancyResult> {
    if full.grid != nni.grid {
        return Err(Error::GridMismatch(format!(
            "series grids differ: {:?} vs {:?}",
            full.grid, nni.grid
        )));
    }
    if (full.source, full.target) != (nni.source, nni.target) {
        return Err(Error::GridMismatch(format!(
            "series describe different transitions: ({}, {}) vs ({}, {})",
            full.source, full.target, nni.source, nni.target
        )));
    }
    let mut result = delta_j(&full.values, &nni.values, &full.grid)?;
    result.pair = Some((full.source, full.target));
    Ok(result)
}

/// Maximum pair discrepancy with its tie-broken arg-max and mirror partner.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MaxDiscrepancy {
    pub result: DiscrepancyResult,
    pub pair: (usize, usize),
    pub mirror: (usize, usize),
}

/// Nearest-neighbour and full decompositions of one `(N, alpha)` chain.
#[derive(Clone, Debug)]
pub struct ModelComparison {
    full: Arc<SpectralDecomposition>,
    nni: Arc<SpectralDecomposition>,
}

impl ModelComparison {
    pub fn new(n_spins: usize, alpha: f64) -> Result<Self> {
        let full = crate::propagator::decompose_spec(&ChainSpec::all_neighbor(n_spins, alpha)?)?;
        let nni = if n_spins == 2 {
            full.clone()
        } else {
            crate::propagator::decompose_spec(&ChainSpec::nearest_neighbor(n_spins, alpha)?)?
        };
        Ok(Self::from_parts(Arc::new(full), Arc::new(nni)))
    }

    pub fn from_cache(cache: &DecompositionCache, n_spins: usize, alpha: f64) -> Result<Self> {
        let full = cache.get_or_decompose(&ChainSpec::all_neighbor(n_spins, alpha)?)?;
        let nni = cache.get_or_decompose(&ChainSpec::nearest_neighbor(n_spins, alpha)?)?;
        Ok(Self::from_parts(full, nni))
    }

    /// Pairs two decompositions of the same chain length. With `N = 2` both
    /// truncations coincide and the full decomposition is shared.
    pub fn from_parts(full: Arc<SpectralDecomposition>, nni: Arc<SpectralDecomposition>) -> Self {
        let nni = if full.n_spins() == 2 {
            Arc::clone(&full)
        } else {
            nni
        };
        Self { full, nni }
    }

    pub fn n_spins(&self) -> usize {
        self.full.n_spins()
    }

    pub fn alpha(&self) -> f64 {
        self.full.spec().alpha()
    }

    pub fn full(&self) -> &SpectralDecomposition {
        &self.full
    }

    pub fn nni(&self) -> &SpectralDecomposition {
        &self.nni
    }

    fn models_coincide(&self) -> bool {
        Arc::ptr_eq(&self.full, &self.nni)
    }

    /// Mirror image `(N+1-j, N+1-k)` of a 1-based pair.
    pub fn mirror(&self, pair: (usize, usize)) -> (usize, usize) {
        let n = self.n_spins();
        (n + 1 - pair.0, n + 1 - pair.1)
    }

    /// `dJ(p_jk)` on `grid`, sampling both amplitudes.
    pub fn delta_j_pair(&self, j: usize, k: usize, grid: &TauGrid) -> Result<DiscrepancyResult> {
        let full = self.full.series(j, k, grid)?;
        let nni = self.nni.series(j, k, grid)?;
        delta_j_series(&full, &nni)
    }

    /// `dJ(p_jk)` for every pair `j <= k`, row-major in `(j, k)`.
    pub fn pair_discrepancies(&self, grid: &TauGrid) -> Result<Vec<DiscrepancyResult>> {
        let n = self.n_spins();
        let frequencies: Vec<f64> = self
            .full
            .eigenvalues()
            .iter()
            .chain(self.nni.eigenvalues())
            .copied()
            .collect();
        let gram = simpson_gram(&frequencies, grid)?;
        let gram_full = gram.view((0, 0), (n, n)).into_owned();
        // columns: full eigenvectors, then nni eigenvectors with flipped sign
        let basis = DMatrix::from_fn(n, 2 * n, |row, col| {
            if col < n {
                self.full.eigenvectors()[(row, col)]
            } else {
                -self.nni.eigenvectors()[(row, col - n)]
            }
        });
        let coincide = self.models_coincide();
        let horizon = grid.horizon();

        let rows: Vec<Vec<Result<DiscrepancyResult>>> = (0..n)
            .into_par_iter()
            .map(|j| {
                let tail = n - j;
                let denominators = quadratic_rows(
                    &self.full.eigenvectors().rows(j, tail).into_owned(),
                    &self.full.eigenvectors().row(j).transpose(),
                    &gram_full,
                );
                let numerators = if coincide {
                    DVector::zeros(tail)
                } else {
                    let unsigned_row = DVector::from_fn(2 * n, |q, _| {
                        if q < n {
                            self.full.eigenvectors()[(j, q)]
                        } else {
                            self.nni.eigenvectors()[(j, q - n)]
                        }
                    });
                    quadratic_rows(&basis.rows(j, tail).into_owned(), &unsigned_row, &gram)
                };
                (0..tail)
                    .map(|offset| {
                        DiscrepancyResult::from_integrals(
                            numerators[offset],
                            denominators[offset],
                            horizon,
                            Some((j + 1, j + 1 + offset)),
                        )
                    })
                    .collect()
            })
            .collect();
        rows.into_iter().flatten().collect()
    }

    /// Largest `dJ(p_jk)` over all pairs. Ties (within a relative 1e-12) go
    /// to the lexicographically smallest `(j, k)` with `j <= k`.
    pub fn delta_j_max(&self, grid: &TauGrid) -> Result<MaxDiscrepancy> {
        let table = self.pair_discrepancies(grid)?;
        let max = table.iter().fold(0.0f64, |acc, r| acc.max(r.value));
        let threshold = max * (1.0 - TIE_RELATIVE);
        let best = table
            .into_iter()
            .find(|r| r.value >= threshold)
            .expect("pair table is never empty");
        let pair = best.pair.expect("pair table entries carry their pair");
        Ok(MaxDiscrepancy {
            result: best,
            pair,
            mirror: self.mirror(pair),
        })
    }
}

/// For each row `u_k` of `rows`, `sum_{q,r} (u_k[q] left[q]) K[q][r] (u_k[r] left[r])`.
fn quadratic_rows(rows: &DMatrix<f64>, left: &DVector<f64>, kernel: &DMatrix<f64>) -> DVector<f64> {
    let dim = kernel.nrows();
    let weighted = DMatrix::from_fn(dim, dim, |q, r| left[q] * kernel[(q, r)] * left[r]);
    let projected = rows * weighted;
    DVector::from_fn(rows.nrows(), |k, _| projected.row(k).dot(&rows.row(k)))
}

/// `dJ(p_jk)` for the `(N, alpha)` chain over `[0, horizon]` (snapped up to an
/// even number of `tau_step` intervals).
pub fn delta_j_pair(
    cache: &DecompositionCache,
    n_spins: usize,
    alpha: f64,
    j: usize,
    k: usize,
    horizon: f64,
    tau_step: f64,
) -> Result<DiscrepancyResult> {
    check_site(j, n_spins.max(1))?;
    check_site(k, n_spins.max(1))?;
    let grid = TauGrid::simpson(horizon, tau_step)?;
    ModelComparison::from_cache(cache, n_spins, alpha)?.delta_j_pair(j, k, &grid)
}

/// Maximum of `dJ(p_jk)` over all pairs of the `(N, alpha)` chain.
pub fn delta_j_max(
    cache: &DecompositionCache,
    n_spins: usize,
    alpha: f64,
    horizon: f64,
    tau_step: f64,
) -> Result<MaxDiscrepancy> {
    let grid = TauGrid::simpson(horizon, tau_step)?;
    ModelComparison::from_cache(cache, n_spins, alpha)?.delta_j_max(&grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn pointwise_examples() {
        assert_eq!(
            pointwise_discrepancy(c(0.3, 0.4), c(0.3, 0.4)).unwrap(),
            0.0
        );
        assert_relative_eq!(
            pointwise_discrepancy(c(1.0, 0.0), c(0.99, 0.0)).unwrap(),
            0.01,
            epsilon = 1e-15
        );
        assert_relative_eq!(
            pointwise_discrepancy(c(0.0, 1.0), c(0.0, -1.0)).unwrap(),
            2.0
        );
        assert_eq!(
            pointwise_discrepancy(c(0.0, 0.0), c(0.1, 0.0)),
            Err(Error::ZeroReference)
        );
    }

    #[test]
    fn tolerance_bounds() {
        assert_eq!(Tolerance::default().value(), 0.01);
        assert!(Tolerance::new(0.0).is_err());
        assert!(Tolerance::new(1.0).is_err());
        let eps = Tolerance::new(0.05).unwrap();
        assert!(eps.accepts(0.049));
        assert!(!eps.accepts(0.05));
    }

    #[test]
    fn identical_signals_have_zero_discrepancy() {
        let grid = TauGrid::simpson(4.0, 0.1).unwrap();
        let signal: Vec<Complex64> = grid.taus().map(|t| c(t.cos(), t.sin() * 0.5)).collect();
        let r = delta_j(&signal, &signal, &grid).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.numerator_sq, 0.0);
    }

    #[test]
    fn rejects_mismatched_or_degenerate_input() {
        let grid = TauGrid::simpson(1.0, 0.1).unwrap();
        let ok = vec![c(1.0, 0.0); grid.len()];
        let short = vec![c(1.0, 0.0); grid.len() - 1];
        assert!(matches!(
            delta_j(&ok, &short, &grid),
            Err(Error::GridMismatch(_))
        ));
        let zero = vec![c(0.0, 0.0); grid.len()];
        assert!(matches!(
            delta_j(&zero, &ok, &grid),
            Err(Error::DegenerateSignal { .. })
        ));
        let odd = TauGrid::new(0.1, 5).unwrap();
        let six = vec![c(1.0, 0.0); 6];
        assert!(matches!(
            delta_j(&six, &six, &odd),
            Err(Error::GridMismatch(_))
        ));
    }

    #[test]
    fn two_site_chain_has_no_truncation_error() {
        let cache = DecompositionCache::default();
        let r = delta_j_pair(&cache, 2, 3.0, 1, 2, 4.0, DEFAULT_TAU_STEP).unwrap();
        assert_eq!(r.value, 0.0);
        let max = delta_j_max(&cache, 2, 3.0, 8.0, DEFAULT_TAU_STEP).unwrap();
        assert_eq!(max.result.value, 0.0);
        assert_eq!(max.pair, (1, 1));
        assert_eq!(max.mirror, (2, 2));
    }

    #[test]
    fn spectral_table_matches_sampled_pairs() {
        for (n, alpha) in [(3, 3.0), (6, 4.2), (9, 8.0)] {
            let cmp = ModelComparison::new(n, alpha).unwrap();
            let grid = TauGrid::simpson(4.0 * n as f64, DEFAULT_TAU_STEP).unwrap();
            let table = cmp.pair_discrepancies(&grid).unwrap();
            assert_eq!(table.len(), n * (n + 1) / 2);
            for entry in &table {
                let (j, k) = entry.pair.unwrap();
                let direct = cmp.delta_j_pair(j, k, &grid).unwrap();
                assert!(
                    (entry.value - direct.value).abs() <= 1e-9 * direct.value.max(1e-6),
                    "N={n} ({j},{k}): {} vs {}",
                    entry.value,
                    direct.value
                );
                assert_relative_eq!(
                    entry.denominator_sq,
                    direct.denominator_sq,
                    max_relative = 1e-10
                );
            }
        }
    }

    #[test]
    fn max_dominates_end_to_end_and_reports_mirror() {
        let cache = DecompositionCache::default();
        let max = delta_j_max(&cache, 8, 3.5, 32.0, DEFAULT_TAU_STEP).unwrap();
        let end = delta_j_pair(&cache, 8, 3.5, 1, 8, 32.0, DEFAULT_TAU_STEP).unwrap();
        assert!(max.result.value >= end.value);
        assert!(max.pair.0 <= max.pair.1);
        assert_eq!(max.mirror, (9 - max.pair.0, 9 - max.pair.1));
    }

    #[test]
    fn longer_chain_transfers_worse() {
        let cache = DecompositionCache::default();
        let short = delta_j_pair(&cache, 5, 3.0, 1, 5, 10.0, DEFAULT_TAU_STEP).unwrap();
        let long = delta_j_pair(&cache, 20, 3.0, 1, 20, 40.0, DEFAULT_TAU_STEP).unwrap();
        assert!(short.value > 0.0);
        assert!(short.value < long.value);
    }

    #[test]
    fn mirror_pairs_agree() {
        let cmp = ModelComparison::new(11, 3.0).unwrap();
        let grid = TauGrid::simpson(44.0, DEFAULT_TAU_STEP).unwrap();
        for (j, k) in [(1, 1), (1, 11), (2, 5), (3, 9)] {
            let a = cmp.delta_j_pair(j, k, &grid).unwrap().value;
            let (mj, mk) = cmp.mirror((j, k));
            let b = cmp.delta_j_pair(mj, mk, &grid).unwrap().value;
            assert!((a - b).abs() < 1e-10, "({j},{k}): {a} vs {b}");
        }
    }
}

//! Critical exponent search: the smallest `alpha` on a uniform grid above
//! which the truncation criterion holds for every examined exponent.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::ChainSpec;
use crate::discrepancy::{delta_j, ModelComparison, Tolerance, DEFAULT_TAU_STEP};
use crate::error::{Error, Result};
use crate::grid::TauGrid;
use crate::propagator::{decompose_spec, AmplitudeSeries, SpectralDecomposition};

/// Lowest exponent examined.
pub const ALPHA_FLOOR: f64 = 3.0;
/// Initial width of the scanned exponent range above the floor.
pub const INITIAL_SPAN: f64 = 8.0;
/// The scan gives up once the range reaches this exponent.
pub const ALPHA_HARD_CEILING: f64 = 64.0;
/// Fraction of the scanned range (at its top) that must pass before stopping.
pub const PASSING_TAIL_FRACTION: f64 = 0.25;
/// Default exponent grid step.
pub const DEFAULT_ALPHA_STEP: f64 = 0.01;

const GRID_SLACK: f64 = 1e-9;
const TRAILING_REPORT: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriterionKind {
    /// `F = p_1N`, the end-to-end transfer amplitude.
    EndToEnd,
    /// `F = {p_jk}`, every transition amplitude.
    FullMatrix,
}

impl CriterionKind {
    pub fn default_horizon_factor(self) -> f64 {
        match self {
            CriterionKind::EndToEnd => 2.0,
            CriterionKind::FullMatrix => 4.0,
        }
    }
}

/// Which signal is compared, and over how long (`T = horizon_factor * N`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionTarget {
    pub kind: CriterionKind,
    pub horizon_factor: f64,
}

impl CriterionTarget {
    pub fn new(kind: CriterionKind, horizon_factor: f64) -> Result<Self> {
        if !(horizon_factor.is_finite() && horizon_factor > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "horizon factor must be positive, got {horizon_factor}"
            )));
        }
        Ok(Self {
            kind,
            horizon_factor,
        })
    }

    pub fn end_to_end() -> Self {
        Self::from(CriterionKind::EndToEnd)
    }

    pub fn full_matrix() -> Self {
        Self::from(CriterionKind::FullMatrix)
    }

    pub fn horizon(&self, n_spins: usize) -> f64 {
        self.horizon_factor * n_spins as f64
    }
}

impl From<CriterionKind> for CriterionTarget {
    fn from(kind: CriterionKind) -> Self {
        Self {
            kind,
            horizon_factor: kind.default_horizon_factor(),
        }
    }
}

/// Numerical knobs shared by every search.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SearchSettings {
    pub epsilon: Tolerance,
    pub alpha_step: f64,
    pub tau_step: f64,
}

impl Default for SearchSettings {
    fn default() -> Self {
        Self {
            epsilon: Tolerance::default(),
            alpha_step: DEFAULT_ALPHA_STEP,
            tau_step: DEFAULT_TAU_STEP,
        }
    }
}

impl SearchSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha_step.is_finite()
            && self.alpha_step > 0.0
            && self.alpha_step <= INITIAL_SPAN)
        {
            return Err(Error::InvalidParameter(format!(
                "alpha step must lie in (0, {INITIAL_SPAN}], got {}",
                self.alpha_step
            )));
        }
        if !(self.tau_step.is_finite() && self.tau_step > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tau step must be positive, got {}",
                self.tau_step
            )));
        }
        Ok(())
    }
}

/// Pair attaining the maximum at the last failing exponent.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BindingPair {
    pub pair: (usize, usize),
    pub mirror: (usize, usize),
    pub delta_j: f64,
    pub alpha: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaCResult {
    pub n_spins: usize,
    pub target: CriterionTarget,
    /// Horizon actually integrated over, after snapping to the Simpson grid.
    pub horizon: f64,
    pub epsilon: f64,
    pub alpha_c: f64,
    pub alpha_resolution: f64,
    pub alpha_ceiling: f64,
    pub tau_step: f64,
    pub binding: Option<BindingPair>,
}

#[derive(Clone, Copy, Debug)]
struct Evaluation {
    value: f64,
    pair: (usize, usize),
}

/// Evaluates the criterion at varying exponent for fixed `N` and horizon.
/// The nearest-neighbour model does not depend on `alpha`, so its
/// decomposition (and, for the end-to-end target, its signal) is built once.
struct CriterionEvaluator {
    n_spins: usize,
    kind: CriterionKind,
    grid: TauGrid,
    nni: Arc<SpectralDecomposition>,
    nni_end_to_end: Option<AmplitudeSeries>,
}

impl CriterionEvaluator {
    fn new(n_spins: usize, kind: CriterionKind, grid: TauGrid) -> Result<Self> {
        let nni = Arc::new(decompose_spec(&ChainSpec::nearest_neighbor(
            n_spins,
            ALPHA_FLOOR,
        )?)?);
        let nni_end_to_end = match kind {
            CriterionKind::EndToEnd => Some(nni.series(1, n_spins, &grid)?),
            CriterionKind::FullMatrix => None,
        };
        Ok(Self {
            n_spins,
            kind,
            grid,
            nni,
            nni_end_to_end,
        })
    }

    fn evaluate(&self, alpha: f64) -> Result<Evaluation> {
        let n = self.n_spins;
        let full = Arc::new(decompose_spec(&ChainSpec::all_neighbor(n, alpha)?)?);
        let comparison = ModelComparison::from_parts(full, Arc::clone(&self.nni));
        match (&self.nni_end_to_end, self.kind) {
            (Some(nni_series), CriterionKind::EndToEnd) => {
                let full_series = comparison.full().series(1, n, &self.grid)?;
                let nni_values = if n == 2 {
                    &full_series.values
                } else {
                    &nni_series.values
                };
                let result = delta_j(&full_series.values, nni_values, &self.grid)?;
                Ok(Evaluation {
                    value: result.value,
                    pair: (1, n),
                })
            }
            _ => {
                let max = comparison.delta_j_max(&self.grid)?;
                Ok(Evaluation {
                    value: max.result.value,
                    pair: max.pair,
                })
            }
        }
    }
}

fn check_chain_length(n_spins: usize) -> Result<()> {
    if n_spins < 2 {
        Err(Error::InvalidChain(format!(
            "need at least 2 spins, got {n_spins}"
        )))
    } else {
        Ok(())
    }
}

/// `dJ(p_1N)` or `max_jk dJ(p_jk)` at one exponent, over the target's horizon.
pub fn criterion_value(
    n_spins: usize,
    alpha: f64,
    target: CriterionTarget,
    settings: &SearchSettings,
) -> Result<f64> {
    check_chain_length(n_spins)?;
    settings.validate()?;
    let grid = TauGrid::simpson(target.horizon(n_spins), settings.tau_step)?;
    Ok(CriterionEvaluator::new(n_spins, target.kind, grid)?
        .evaluate(alpha)?
        .value)
}

/// Critical exponent for the target's default horizon.
pub fn find_alpha_c(
    n_spins: usize,
    target: CriterionTarget,
    settings: &SearchSettings,
) -> Result<AlphaCResult> {
    check_chain_length(n_spins)?;
    scan(n_spins, target, target.horizon(n_spins), settings)
}

/// Critical exponent with an explicit horizon `T` overriding the target's factor.
pub fn find_alpha_c_at_horizon(
    n_spins: usize,
    kind: CriterionKind,
    horizon: f64,
    settings: &SearchSettings,
) -> Result<AlphaCResult> {
    check_chain_length(n_spins)?;
    let target = CriterionTarget::new(kind, horizon / n_spins as f64)?;
    scan(n_spins, target, horizon, settings)
}

fn scan(
    n_spins: usize,
    target: CriterionTarget,
    horizon: f64,
    settings: &SearchSettings,
) -> Result<AlphaCResult> {
    settings.validate()?;
    let grid = TauGrid::simpson(horizon, settings.tau_step)?;
    let evaluator = CriterionEvaluator::new(n_spins, target.kind, grid)?;
    let step = settings.alpha_step;
    let epsilon = settings.epsilon;
    let alpha_at = |index: usize| ALPHA_FLOOR + index as f64 * step;
    let max_span = ALPHA_HARD_CEILING - ALPHA_FLOOR;

    let mut evaluations: Vec<Evaluation> = Vec::new();
    let mut span = INITIAL_SPAN;
    let last = loop {
        let last = (span / step + GRID_SLACK).floor() as usize;
        let fresh: Vec<Result<Evaluation>> = (evaluations.len()..=last)
            .into_par_iter()
            .map(|index| evaluator.evaluate(alpha_at(index)))
            .collect();
        for evaluation in fresh {
            evaluations.push(evaluation?);
        }

        let tail_start =
            (((1.0 - PASSING_TAIL_FRACTION) * span) / step - GRID_SLACK).ceil() as usize;
        if evaluations[tail_start..=last]
            .iter()
            .all(|e| epsilon.accepts(e.value))
        {
            break last;
        }
        if span >= max_span {
            let first = (last + 1).saturating_sub(TRAILING_REPORT);
            let trailing = (first..=last)
                .map(|index| (alpha_at(index), evaluations[index].value))
                .collect();
            return Err(Error::CriterionNeverSatisfied {
                n_spins,
                ceiling: alpha_at(last),
                trailing,
            });
        }
        span = (2.0 * span).min(max_span);
    };

    let last_failing = evaluations.iter().rposition(|e| !epsilon.accepts(e.value));
    let alpha_c = last_failing.map_or(ALPHA_FLOOR, |index| alpha_at(index + 1));
    let binding = last_failing.map(|index| {
        let pair = evaluations[index].pair;
        BindingPair {
            pair,
            mirror: (n_spins + 1 - pair.0, n_spins + 1 - pair.1),
            delta_j: evaluations[index].value,
            alpha: alpha_at(index),
        }
    });

    Ok(AlphaCResult {
        n_spins,
        target,
        horizon: grid.horizon(),
        epsilon: epsilon.value(),
        alpha_c,
        alpha_resolution: step,
        alpha_ceiling: alpha_at(last),
        tau_step: settings.tau_step,
        binding,
    })
}

/// `alpha_c(N)` for each chain length; failures are reported per entry.
pub fn alpha_c_vs_n(
    n_grid: &[usize],
    target: CriterionTarget,
    settings: &SearchSettings,
) -> Vec<(usize, Result<AlphaCResult>)> {
    n_grid
        .par_iter()
        .map(|&n| (n, find_alpha_c(n, target, settings)))
        .collect()
}

/// `alpha_c(T)` at fixed `N` for each horizon.
pub fn alpha_c_vs_t(
    n_spins: usize,
    t_grid: &[f64],
    kind: CriterionKind,
    settings: &SearchSettings,
) -> Vec<(f64, Result<AlphaCResult>)> {
    t_grid
        .par_iter()
        .map(|&horizon| {
            (
                horizon,
                find_alpha_c_at_horizon(n_spins, kind, horizon, settings),
            )
        })
        .collect()
}

/// The pair binding the full-matrix criterion just below `alpha_c`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransitionRecord {
    pub n_spins: usize,
    pub alpha_c: f64,
    /// `None` when the criterion already holds at the floor exponent.
    pub binding: Option<BindingPair>,
}

impl TransitionRecord {
    pub fn from_result(result: &AlphaCResult) -> Self {
        Self {
            n_spins: result.n_spins,
            alpha_c: result.alpha_c,
            binding: result.binding,
        }
    }
}

pub fn argmax_transition_map(
    n_grid: &[usize],
    settings: &SearchSettings,
) -> Vec<(usize, Result<TransitionRecord>)> {
    alpha_c_vs_n(n_grid, CriterionTarget::full_matrix(), settings)
        .into_iter()
        .map(|(n, outcome)| (n, outcome.map(|r| TransitionRecord::from_result(&r))))
        .collect()
}

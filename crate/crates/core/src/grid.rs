use serde::Serialize;

use crate::error::{Error, Result};

// Absorbs representation error when a horizon is an exact multiple of the step.
const SNAP_SLACK: f64 = 1e-9;

/// Uniform time grid `tau_s = s * step`, `s = 0..=intervals`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TauGrid {
    step: f64,
    intervals: usize,
}

impl TauGrid {
    pub fn new(step: f64, intervals: usize) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "grid step must be positive, got {step}"
            )));
        }
        if intervals == 0 {
            return Err(Error::InvalidParameter(
                "grid needs at least one interval".into(),
            ));
        }
        Ok(Self { step, intervals })
    }

    /// Smallest grid with the given step reaching at least `horizon`.
    pub fn covering(horizon: f64, step: f64) -> Result<Self> {
        check_horizon(horizon)?;
        let intervals = (horizon / step - SNAP_SLACK).ceil().max(1.0) as usize;
        Self::new(step, intervals)
    }

    /// Like [`TauGrid::covering`] but with an even number of intervals, so
    /// composite Simpson applies. The horizon is snapped upward.
    pub fn simpson(horizon: f64, step: f64) -> Result<Self> {
        check_horizon(horizon)?;
        let half = (horizon / (2.0 * step) - SNAP_SLACK).ceil().max(1.0) as usize;
        Self::new(step, 2 * half)
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn intervals(&self) -> usize {
        self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn horizon(&self) -> f64 {
        self.intervals as f64 * self.step
    }

    pub fn tau(&self, s: usize) -> f64 {
        s as f64 * self.step
    }

    pub fn taus(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.intervals).map(move |s| self.tau(s))
    }

    pub fn is_simpson_compatible(&self) -> bool {
        self.intervals.is_multiple_of(2)
    }
}

fn check_horizon(horizon: f64) -> Result<()> {
    if horizon.is_finite() && horizon > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "horizon must be positive, got {horizon}"
        )))
    }
}

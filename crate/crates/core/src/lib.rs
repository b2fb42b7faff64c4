//! Applicability of the nearest-neighbour approximation to one-excitation
//! dynamics of open homogeneous spin-1/2 chains with XX couplings decaying
//! as `1/r^alpha`.
//!
//! The pipeline: build the reduced hopping matrix ([`chain`]), diagonalize
//! it once and read transition amplitudes off the spectrum ([`propagator`]),
//! compare truncated and full evolutions through an L2 discrepancy
//! ([`discrepancy`]), scan the exponent for the critical value
//! ([`criticality`]), and fit its logarithmic growth with chain length
//! ([`fitting`]).
//!
//! Sites are numbered from 1 in every public interface.

pub mod chain;
pub mod criticality;
pub mod discrepancy;
mod error;
pub mod fitting;
pub mod grid;
pub mod propagator;
pub mod quadrature;

pub use chain::{build_coupling_matrix, ChainSpec, CouplingMatrix};
pub use criticality::{
    alpha_c_vs_n, alpha_c_vs_t, argmax_transition_map, criterion_value, find_alpha_c,
    find_alpha_c_at_horizon, AlphaCResult, BindingPair, CriterionKind, CriterionTarget,
    SearchSettings, TransitionRecord,
};
pub use discrepancy::{
    delta_j, delta_j_max, delta_j_pair, pointwise_discrepancy, DiscrepancyResult, MaxDiscrepancy,
    ModelComparison, Tolerance,
};
pub use error::{Error, Result};
pub use fitting::{a_vs_nmax, fit_log, LogFit};
pub use grid::TauGrid;
pub use propagator::{
    amplitude_matrix, amplitude_series, decompose, decompose_spec, evolve_state,
    nni_analytic_amplitude, AmplitudeSeries, DecompositionCache, InitialState,
    SpectralDecomposition,
};

pub use num_complex::Complex64;

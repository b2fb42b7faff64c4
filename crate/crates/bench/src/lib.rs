//! Shared fixtures for the benchmarks.

use nni_validity::{ChainSpec, TauGrid};

/// Chain lengths exercised by the sweep benchmarks.
pub const CHAIN_LENGTHS: [usize; 3] = [20, 50, 100];

pub fn all_neighbor(n: usize) -> ChainSpec {
    ChainSpec::all_neighbor(n, 3.0).expect("valid chain")
}

/// Grid of the end-to-end criterion for a chain of `n` spins.
pub fn end_to_end_grid(n: usize) -> TauGrid {
    TauGrid::simpson(2.0 * n as f64, 0.05).expect("valid grid")
}

/// Grid of the full-matrix criterion for a chain of `n` spins.
pub fn full_matrix_grid(n: usize) -> TauGrid {
    TauGrid::simpson(4.0 * n as f64, 0.05).expect("valid grid")
}

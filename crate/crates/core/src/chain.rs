//! Open homogeneous chain with power-law XX couplings, reduced to the
//! one-excitation sector.
//!
//! In the basis `|j>` (only spin `j` flipped) the Hamiltonian truncated to
//! `M` neighbours, divided by the nearest-neighbour coupling, is the real
//! symmetric hopping matrix
//!
//! ```text
//! A[j][k] = 1 / (2 |j - k|^alpha)   for 1 <= |j - k| <= M
//! A[j][k] = 0                       otherwise
//! ```
//!
//! The factor 1/2 comes from `IxIx + IyIy = (I+I- + I-I+)/2`. Time is measured
//! in units of the inverse nearest-neighbour coupling, so adjacent hopping is
//! exactly 1/2 for every exponent.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};

/// Hopping amplitude between adjacent sites in reduced units.
pub const NEAREST_HOPPING: f64 = 0.5;

/// One physical scenario: `N` spins, couplings kept up to range `M`, exponent `alpha`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChainSpec {
    n_spins: usize,
    neighbor_range: usize,
    alpha: f64,
}

impl ChainSpec {
    pub fn new(n_spins: usize, neighbor_range: usize, alpha: f64) -> Result<Self> {
        if n_spins < 2 {
            return Err(Error::InvalidChain(format!(
                "need at least 2 spins, got {n_spins}"
            )));
        }
        if neighbor_range < 1 || neighbor_range > n_spins - 1 {
            return Err(Error::InvalidChain(format!(
                "neighbor range must lie in 1..={}, got {neighbor_range}",
                n_spins - 1
            )));
        }
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidChain(format!(
                "coupling exponent must be positive and finite, got {alpha}"
            )));
        }
        Ok(Self {
            n_spins,
            neighbor_range,
            alpha,
        })
    }

    /// Nearest-neighbour truncation, `M = 1`.
    pub fn nearest_neighbor(n_spins: usize, alpha: f64) -> Result<Self> {
        Self::new(n_spins, 1, alpha)
    }

    /// Full model, `M = N - 1`.
    pub fn all_neighbor(n_spins: usize, alpha: f64) -> Result<Self> {
        Self::new(n_spins, n_spins.saturating_sub(1).max(1), alpha)
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn neighbor_range(&self) -> usize {
        self.neighbor_range
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn is_all_neighbor(&self) -> bool {
        self.neighbor_range == self.n_spins - 1
    }

    /// Reduced coupling between sites at distance `distance`, zero outside the band.
    pub fn coupling(&self, distance: usize) -> f64 {
        if distance == 0 || distance > self.neighbor_range {
            0.0
        } else {
            NEAREST_HOPPING / (distance as f64).powf(self.alpha)
        }
    }

    /// Row-sum bound on the spectral radius, `sum_{m=1}^{M} m^-alpha`.
    pub fn spectral_radius_bound(&self) -> f64 {
        (1..=self.neighbor_range)
            .map(|m| (m as f64).powf(-self.alpha))
            .sum()
    }
}

/// Dense one-excitation hopping matrix for a [`ChainSpec`].
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingMatrix {
    spec: ChainSpec,
    entries: DMatrix<f64>,
}

impl CouplingMatrix {
    pub fn spec(&self) -> &ChainSpec {
        &self.spec
    }

    pub fn size(&self) -> usize {
        self.spec.n_spins
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// Entry at 1-based sites `(j, k)`.
    pub fn get(&self, j: usize, k: usize) -> Result<f64> {
        check_site(j, self.size())?;
        check_site(k, self.size())?;
        Ok(self.entries[(j - 1, k - 1)])
    }

    pub fn into_entries(self) -> DMatrix<f64> {
        self.entries
    }
}

pub fn build_coupling_matrix(spec: &ChainSpec) -> CouplingMatrix {
    let n = spec.n_spins;
    let entries = DMatrix::from_fn(n, n, |j, k| spec.coupling(j.abs_diff(k)));
    CouplingMatrix {
        spec: *spec,
        entries,
    }
}

pub(crate) fn check_site(site: usize, n_spins: usize) -> Result<()> {
    if site == 0 || site > n_spins {
        Err(Error::SiteOutOfRange { site, n_spins })
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn three_site_all_neighbor_entries() {
        let m = build_coupling_matrix(&ChainSpec::new(3, 2, 3.0).unwrap());
        assert_eq!(m.get(1, 2).unwrap(), 0.5);
        assert_eq!(m.get(2, 3).unwrap(), 0.5);
        assert_eq!(m.get(1, 3).unwrap(), 0.0625);
        assert_eq!(m.get(3, 1).unwrap(), 0.0625);
    }

    #[test]
    fn three_site_nearest_neighbor_drops_long_bond() {
        let m = build_coupling_matrix(&ChainSpec::new(3, 1, 3.0).unwrap());
        assert_eq!(m.get(1, 3).unwrap(), 0.0);
        assert_eq!(m.get(1, 2).unwrap(), 0.5);
    }

    #[test]
    fn two_sites_independent_of_alpha() {
        for alpha in [0.5, 3.0, 5.0, 40.0] {
            let m = build_coupling_matrix(&ChainSpec::new(2, 1, alpha).unwrap());
            assert_eq!(m.get(1, 2).unwrap(), 0.5);
            assert_eq!(m.get(2, 1).unwrap(), 0.5);
            assert_eq!(m.get(1, 1).unwrap(), 0.0);
        }
    }

    #[test]
    fn rejects_invalid_specs() {
        assert!(matches!(
            ChainSpec::new(1, 1, 3.0),
            Err(Error::InvalidChain(_))
        ));
        assert!(matches!(
            ChainSpec::new(5, 0, 3.0),
            Err(Error::InvalidChain(_))
        ));
        assert!(matches!(
            ChainSpec::new(5, 5, 3.0),
            Err(Error::InvalidChain(_))
        ));
        assert!(matches!(
            ChainSpec::new(5, 2, 0.0),
            Err(Error::InvalidChain(_))
        ));
        assert!(matches!(
            ChainSpec::new(5, 2, f64::NAN),
            Err(Error::InvalidChain(_))
        ));
    }

    #[test]
    fn site_lookup_is_one_based() {
        let m = build_coupling_matrix(&ChainSpec::new(4, 3, 3.0).unwrap());
        assert!(matches!(
            m.get(0, 1),
            Err(Error::SiteOutOfRange { site: 0, .. })
        ));
        assert!(matches!(
            m.get(1, 5),
            Err(Error::SiteOutOfRange { site: 5, .. })
        ));
    }

    proptest! {
        #[test]
        fn symmetric_zero_diagonal_banded(n in 2usize..40, m_frac in 0.0f64..1.0, alpha in 0.5f64..20.0) {
            let m = 1 + ((n - 2) as f64 * m_frac).round() as usize;
            let spec = ChainSpec::new(n, m, alpha).unwrap();
            let a = build_coupling_matrix(&spec);
            for j in 1..=n {
                prop_assert_eq!(a.get(j, j).unwrap(), 0.0);
                for k in 1..=n {
                    prop_assert_eq!(a.get(j, k).unwrap(), a.get(k, j).unwrap());
                    let d = j.abs_diff(k);
                    if d == 1 {
                        prop_assert_eq!(a.get(j, k).unwrap(), 0.5);
                    } else if d > m {
                        prop_assert_eq!(a.get(j, k).unwrap(), 0.0);
                    }
                }
            }
        }

        #[test]
        fn bands_nest(n in 3usize..30, alpha in 1.0f64..15.0, m_frac in 0.0f64..1.0) {
            let m = 1 + ((n - 3) as f64 * m_frac).round() as usize;
            let narrow = build_coupling_matrix(&ChainSpec::new(n, m, alpha).unwrap());
            let wide = build_coupling_matrix(&ChainSpec::new(n, m + 1, alpha).unwrap());
            for j in 1..=n {
                for k in 1..=n {
                    if j.abs_diff(k) <= m {
                        prop_assert_eq!(narrow.get(j, k).unwrap(), wide.get(j, k).unwrap());
                    }
                }
            }
        }

        #[test]
        fn spectral_radius_within_row_sum_bound(n in 2usize..50, alpha in 1.0f64..15.0, full in any::<bool>()) {
            let spec = if full { ChainSpec::all_neighbor(n, alpha) } else { ChainSpec::nearest_neighbor(n, alpha) }.unwrap();
            let a = build_coupling_matrix(&spec).into_entries();
            let eig = a.symmetric_eigenvalues();
            let radius = eig.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
            prop_assert!(radius <= spec.spectral_radius_bound() + 1e-12);
        }
    }
}

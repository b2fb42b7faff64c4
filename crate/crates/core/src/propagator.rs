//! Transition amplitudes `p_jk;M(tau) = <k| exp(-i A_M tau) |j>` in the
//! one-excitation sector, computed from one spectral decomposition per
//! coupling matrix.

use std::collections::{HashMap, VecDeque};
use std::f64::consts::PI;
use std::sync::{Arc, RwLock};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use crate::chain::{build_coupling_matrix, check_site, ChainSpec, CouplingMatrix};
use crate::error::{Error, Result};
use crate::grid::TauGrid;

const EIGEN_MAX_ITERATIONS: usize = 10_000;

/// Eigenvalues (ascending) and orthonormal eigenvectors (columns) of a
/// coupling matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralDecomposition {
    spec: ChainSpec,
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<f64>,
}

pub fn decompose(matrix: &CouplingMatrix) -> Result<SpectralDecomposition> {
    let spec = *matrix.spec();
    let eigen =
        SymmetricEigen::try_new(matrix.entries().clone(), f64::EPSILON, EIGEN_MAX_ITERATIONS)
            .ok_or(Error::EigenNoConvergence {
                n_spins: spec.n_spins(),
                neighbor_range: spec.neighbor_range(),
                alpha: spec.alpha(),
            })?;

    let n = spec.n_spins();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eigen.eigenvalues[a].total_cmp(&eigen.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&q| eigen.eigenvalues[q]).collect();
    let eigenvectors = DMatrix::from_fn(n, n, |row, col| eigen.eigenvectors[(row, order[col])]);

    Ok(SpectralDecomposition {
        spec,
        eigenvalues,
        eigenvectors,
    })
}

/// Builds and decomposes the coupling matrix of `spec`.
pub fn decompose_spec(spec: &ChainSpec) -> Result<SpectralDecomposition> {
    decompose(&build_coupling_matrix(spec))
}

impl SpectralDecomposition {
    pub fn spec(&self) -> &ChainSpec {
        &self.spec
    }

    pub fn n_spins(&self) -> usize {
        self.spec.n_spins()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    /// Spectral weights `c_q = V[j][q] V[k][q]` of the amplitude between
    /// 1-based sites `j` and `k`, so that `p_jk(tau) = sum_q c_q exp(-i l_q tau)`.
    pub fn transition_weights(&self, j: usize, k: usize) -> Result<Vec<f64>> {
        let n = self.n_spins();
        check_site(j, n)?;
        check_site(k, n)?;
        Ok((0..n)
            .map(|q| self.eigenvectors[(j - 1, q)] * self.eigenvectors[(k - 1, q)])
            .collect())
    }

    pub fn amplitude(&self, j: usize, k: usize, tau: f64) -> Result<Complex64> {
        let weights = self.transition_weights(j, k)?;
        if tau == 0.0 {
            return Ok(kronecker(j, k));
        }
        Ok(exponential_sum(&weights, &self.eigenvalues, tau))
    }

    /// Amplitude of `j -> k` sampled on every point of `grid`.
    pub fn series(&self, j: usize, k: usize, grid: &TauGrid) -> Result<AmplitudeSeries> {
        let weights = self.transition_weights(j, k)?;
        let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
        for (&c, &lambda) in weights.iter().zip(&self.eigenvalues) {
            if c == 0.0 {
                continue;
            }
            for (s, value) in values.iter_mut().enumerate() {
                let (sin, cos) = (lambda * grid.tau(s)).sin_cos();
                *value += Complex64::new(c * cos, -c * sin);
            }
        }
        // P(0) = I exactly, not up to eigenvector round-off
        values[0] = kronecker(j, k);
        Ok(AmplitudeSeries {
            source: j,
            target: k,
            truncation: self.spec.neighbor_range(),
            grid: *grid,
            values,
        })
    }

    /// Largest entrywise deviation of `V^T V` from the identity.
    pub fn orthonormality_error(&self) -> f64 {
        let gram = self.eigenvectors.transpose() * &self.eigenvectors;
        max_abs_deviation(&gram, &DMatrix::identity(self.n_spins(), self.n_spins()))
    }

    /// Largest entrywise deviation of `V diag(l) V^T` from `matrix`.
    pub fn reconstruction_error(&self, matrix: &CouplingMatrix) -> f64 {
        let scaled = DMatrix::from_fn(self.n_spins(), self.n_spins(), |row, col| {
            self.eigenvectors[(row, col)] * self.eigenvalues[col]
        });
        let rebuilt = scaled * self.eigenvectors.transpose();
        max_abs_deviation(&rebuilt, matrix.entries())
    }
}

fn max_abs_deviation(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .fold(0.0, |acc, (x, y)| acc.max((x - y).abs()))
}

fn exponential_sum(weights: &[f64], frequencies: &[f64], tau: f64) -> Complex64 {
    weights
        .iter()
        .zip(frequencies)
        .fold(Complex64::new(0.0, 0.0), |acc, (&c, &lambda)| {
            let (sin, cos) = (lambda * tau).sin_cos();
            acc + Complex64::new(c * cos, -c * sin)
        })
}

fn kronecker(j: usize, k: usize) -> Complex64 {
    Complex64::new(if j == k { 1.0 } else { 0.0 }, 0.0)
}

/// Full propagator `P(tau)` with `P[k][j] = p_jk(tau)` (0-based storage).
///
/// The matrix is symmetric by construction: the upper triangle is computed
/// and mirrored.
pub fn amplitude_matrix(decomp: &SpectralDecomposition, tau: f64) -> DMatrix<Complex64> {
    let n = decomp.n_spins();
    let v = &decomp.eigenvectors;
    let (sin, cos): (Vec<f64>, Vec<f64>) = decomp
        .eigenvalues
        .iter()
        .map(|&lambda| (lambda * tau).sin_cos())
        .unzip();
    let v_cos = DMatrix::from_fn(n, n, |row, q| v[(row, q)] * cos[q]);
    let v_sin = DMatrix::from_fn(n, n, |row, q| v[(row, q)] * sin[q]);
    let re = v_cos * v.transpose();
    let im = v_sin * v.transpose();
    DMatrix::from_fn(n, n, |row, col| {
        let (a, b) = if row <= col { (row, col) } else { (col, row) };
        Complex64::new(re[(a, b)], -im[(a, b)])
    })
}

/// Samples of one transition amplitude on a uniform grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AmplitudeSeries {
    pub source: usize,
    pub target: usize,
    pub truncation: usize,
    pub grid: TauGrid,
    pub values: Vec<Complex64>,
}

/// Amplitude `p_jk;M` of `spec` on `grid`, sites 1-based.
pub fn amplitude_series(
    spec: &ChainSpec,
    j: usize,
    k: usize,
    grid: &TauGrid,
) -> Result<AmplitudeSeries> {
    check_site(j, spec.n_spins())?;
    check_site(k, spec.n_spins())?;
    decompose_spec(spec)?.series(j, k, grid)
}

/// Closed-form nearest-neighbour amplitude from the sine eigenbasis of the
/// uniform tridiagonal chain: `l_q = cos(q pi / (N+1))`,
/// `v_q(j) = sqrt(2/(N+1)) sin(q j pi / (N+1))`.
///
/// Independent of the eigensolver; used to cross-check it.
pub fn nni_analytic_amplitude(n: usize, j: usize, k: usize, tau: f64) -> Complex64 {
    let denom = (n + 1) as f64;
    let norm = 2.0 / denom;
    (1..=n).fold(Complex64::new(0.0, 0.0), |acc, q| {
        let q = q as f64;
        let lambda = (q * PI / denom).cos();
        let weight = norm * (q * j as f64 * PI / denom).sin() * (q * k as f64 * PI / denom).sin();
        let (sin, cos) = (lambda * tau).sin_cos();
        acc + Complex64::new(weight * cos, -weight * sin)
    })
}

/// Normalized one-excitation state `sum_j a_j |j>`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InitialState {
    amplitudes: Vec<Complex64>,
}

const NORMALIZATION_TOLERANCE: f64 = 1e-12;

impl InitialState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm_sqr: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if amplitudes.is_empty() || (norm_sqr - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::NotNormalized { norm_sqr });
        }
        Ok(Self { amplitudes })
    }

    /// Single excitation on 1-based site `j`.
    pub fn basis(n: usize, j: usize) -> Result<Self> {
        check_site(j, n)?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); n];
        amplitudes[j - 1] = Complex64::new(1.0, 0.0);
        Ok(Self { amplitudes })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::NotNormalized { norm_sqr: 0.0 });
        }
        let a = 1.0 / (n as f64).sqrt();
        Self::new(vec![Complex64::new(a, 0.0); n])
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }
}

/// `b_k = sum_j a_j p_jk(tau)` under the truncation in `spec`.
pub fn evolve_state(state: &InitialState, spec: &ChainSpec, tau: f64) -> Result<InitialState> {
    decompose_spec(spec)?.evolve(state, tau)
}

impl SpectralDecomposition {
    /// Evolves `state` to time `tau` by projecting onto the eigenbasis.
    pub fn evolve(&self, state: &InitialState, tau: f64) -> Result<InitialState> {
        let n = self.n_spins();
        if state.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: state.len(),
            });
        }
        if tau == 0.0 {
            return Ok(state.clone());
        }
        let v = &self.eigenvectors;
        let weights: Vec<Complex64> = (0..n)
            .map(|q| {
                let projection = (0..n).fold(Complex64::new(0.0, 0.0), |acc, j| {
                    acc + state.amplitudes[j] * v[(j, q)]
                });
                projection * Complex64::from_polar(1.0, -self.eigenvalues[q] * tau)
            })
            .collect();
        let amplitudes = (0..n)
            .map(|k| {
                weights
                    .iter()
                    .enumerate()
                    .fold(Complex64::new(0.0, 0.0), |acc, (q, w)| acc + w * v[(k, q)])
            })
            .collect();
        Ok(InitialState { amplitudes })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
struct CacheKey {
    n_spins: usize,
    neighbor_range: usize,
    alpha_bits: u64,
}

impl From<&ChainSpec> for CacheKey {
    fn from(spec: &ChainSpec) -> Self {
        Self {
            n_spins: spec.n_spins(),
            neighbor_range: spec.neighbor_range(),
            alpha_bits: spec.alpha().to_bits(),
        }
    }
}

// Lookup table plus insertion order for FIFO eviction.
type Entries = (
    HashMap<CacheKey, Arc<SpectralDecomposition>>,
    VecDeque<CacheKey>,
);

/// Bounded, thread-safe store of decompositions keyed by `(N, M, alpha)`.
///
/// Oldest entries are evicted first once `capacity` is reached.
#[derive(Debug)]
pub struct DecompositionCache {
    capacity: usize,
    entries: RwLock<Entries>,
}

impl Default for DecompositionCache {
    fn default() -> Self {
        Self::with_capacity(256)
    }
}

impl DecompositionCache {
    pub fn with_capacity(capacity: usize) -> Self {
        Self {
            capacity: capacity.max(1),
            entries: RwLock::new((HashMap::new(), VecDeque::new())),
        }
    }

    pub fn get_or_decompose(&self, spec: &ChainSpec) -> Result<Arc<SpectralDecomposition>> {
        let key = CacheKey::from(spec);
        if let Some(hit) = self
            .entries
            .read()
            .expect("cache lock poisoned")
            .0
            .get(&key)
        {
            return Ok(Arc::clone(hit));
        }
        let decomp = Arc::new(decompose_spec(spec)?);
        let mut guard = self.entries.write().expect("cache lock poisoned");
        let (map, order) = &mut *guard;
        if let Some(existing) = map.get(&key) {
            return Ok(Arc::clone(existing));
        }
        if map.len() >= self.capacity {
            if let Some(oldest) = order.pop_front() {
                map.remove(&oldest);
            }
        }
        map.insert(key, Arc::clone(&decomp));
        order.push_back(key);
        Ok(decomp)
    }

    pub fn len(&self) -> usize {
        self.entries.read().expect("cache lock poisoned").0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid chain: {0}")]
    InvalidChain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("site {site} out of range for a chain of {n_spins} spins (sites are 1-based)")]
    SiteOutOfRange { site: usize, n_spins: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("state is not normalized: sum |a_j|^2 = {norm_sqr}")]
    NotNormalized { norm_sqr: f64 },

    #[error(
        "eigensolver did not converge for N = {n_spins}, M = {neighbor_range}, alpha = {alpha}"
    )]
    EigenNoConvergence {
        n_spins: usize,
        neighbor_range: usize,
        alpha: f64,
    },

    #[error("reference value is zero; the pointwise ratio is undefined, use the integral criterion instead")]
    ZeroReference,

    #[error("degenerate reference signal: integral of |F|^2 is {denominator_sq:e}")]
    DegenerateSignal { denominator_sq: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("criterion never satisfied for N = {n_spins} up to alpha = {ceiling}; trailing values {trailing:?}")]
    CriterionNeverSatisfied {
        n_spins: usize,
        ceiling: f64,
        trailing: Vec<(f64, f64)>,
    },

    #[error("need at least {required} points, got {found}")]
    InsufficientPoints { found: usize, required: usize },

    #[error("degenerate design: {0}")]
    DegenerateDesign(String),
}

impl Error {
    /// True for failures of the numerics (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::EigenNoConvergence { .. }
                | Error::CriterionNeverSatisfied { .. }
                | Error::DegenerateSignal { .. }
        )
    }
}

use thiserror::Error;

/// Failures raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid spin quantum number: 2j = {0} (must be a nonnegative integer)")]
    InvalidSpin(i64),

    #[error("matrix is not Hermitian (max |M - M^H| = {deviation:e})")]
    NonHermitian { deviation: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("quadrature did not converge: doubling the node count changed the result by {change:e} (tolerance {tolerance:e})")]
    QuadratureNotConverged { change: f64, tolerance: f64 },

    #[error("Hamiltonian has no contravariant symbol attached")]
    MissingSymbol,

    #[error(
        "path weight exponent {exponent:.3} exceeds the cap {cap}; the confining term scales with \
         nu t (j+1) = {nu_t_j:.3}, reduce nu, t or j"
    )]
    ExponentCap { exponent: f64, cap: f64, nu_t_j: f64 },

    #[error("projector modes are rank deficient (Gram condition number {condition:e})")]
    RankDeficient { condition: f64 },

    #[error("splitting step rejected: halving the step changed the kernel by {relative_change:.3e} (relative)")]
    StepSizeRejected { relative_change: f64 },

    #[error("point ({z1}, {z2}) lies outside the lattice interior")]
    OutsideGrid { z1: f64, z2: f64 },

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    EigenNotConverged { iterations: usize, residual: f64 },

    #[error("matrix is not positive definite at pivot {pivot}")]
    NotPositiveDefinite { pivot: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

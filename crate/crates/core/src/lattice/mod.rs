//! Lattice discretization of the magnetic Schrödinger operator
//!
//! ```text
//! R = (i∂₁ + A₁)² + (i∂₂ + A₂)² - 4(j+1)/(1+|z|²)²,
//! A = (2(j+1)z₂/(1+|z|²), -2(j+1)z₁/(1+|z|²)),
//! ```
//!
//! whose zero-energy space has dimension `2j+1` and reproduces the coherent
//! overlap as its projector kernel, and of the semigroup `e^{-t(νR + iH)}`
//! that approaches the compressed spin dynamics as `ν → ∞`.

mod band;
mod convergence;
mod eigen;
mod evolve;
mod grid;
mod operator;
mod projector;
mod sparse;

pub use band::BandCholesky;
pub use convergence::{
    convergence_check, ConvergenceOptions, ConvergenceRecord, ConvergenceReport, GridRecord, PairSummary, T_MIN,
};
pub use eigen::{
    count_below_gap, lowest_eigenpairs, zero_mode_count, zero_mode_count_with, EigenOptions, LowSpectrum,
    ZeroModeReport, GAP_JUMP,
};
pub use evolve::{
    dense_semigroup, evolve_kernel, evolve_kernel_with_potential, scaled_bessel_i, splitting_steps, ChebyshevExp,
    EvolveMethod, EvolveOptions, KernelResult,
};
pub use grid::GridSpec;
pub use operator::{
    scalar_potential, vector_potential, Discretization, LinkField, MagneticGridOperator, PHASE_RESOLUTION_LIMIT,
};
pub use projector::{analytic_mode_coefficient, compressed_evolution, ProjectorKernel, MAX_GRAM_CONDITION};
pub use sparse::CsrMatrix;

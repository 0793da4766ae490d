//! Numerical laboratory for coherent-state path integrals of a single spin.
//!
//! The same propagator `⟨z| e^{-itH} |z'⟩` is computed four ways:
//!
//! * exactly, by dense diagonalization on `C^{2j+1}` ([`hamiltonian`]);
//! * as a Monte Carlo average over planar Brownian bridges with diffusion
//!   constant `ν`, in the limit `ν → ∞` ([`bridge`]);
//! * as the kernel of the semigroup `e^{-t(νR + iH)}` of a magnetic
//!   Schrödinger operator discretized on a lattice ([`lattice`]);
//! * and, for growing `j`, against canonical coherent-state propagators
//!   after contracting su(2) to the Heisenberg–Weyl algebra ([`contraction`]).
//!
//! All numerics are generic over [`Real`] (`f32` or `f64`); the `*64`
//! aliases below pin the double-precision instantiation used by the CLI.

pub mod bridge;
pub mod contraction;
pub mod dense;
pub mod error;
pub mod hamiltonian;
pub mod lattice;
pub mod quadrature;
pub mod record;
pub mod scalar;
pub mod spin;

pub use error::{Error, Result};
pub use hamiltonian::{
    exact_propagator_element, propagator, reconstruct_from_symbol, symbol_for_generator_combo, HamiltonianSpec,
    Symbol,
};
pub use quadrature::PlaneQuadrature;
pub use scalar::{Real, C};
pub use spin::{CoherentPoint, Mode, SpinSystem};

pub type SpinSystem64 = SpinSystem<f64>;
pub type CoherentPoint64 = CoherentPoint<f64>;
pub type HamiltonianSpec64 = HamiltonianSpec<f64>;
pub type PlaneQuadrature64 = PlaneQuadrature<f64>;
pub type Complex64 = C<f64>;

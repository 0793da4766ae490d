//! Brownian-bridge Monte Carlo for the regularized coherent-state path
//! integral.
//!
//! For diffusion constant `ν` the propagator element is approximated by
//!
//! ```text
//! e^{-|z-z'|²/4tν} / (4πtν) · E[ exp{ 4(j+1)ν ∫ ds (1+|b|²)^{-2}
//!                                   + 2i(j+1) ∫ (b₁ db₂ - b₂ db₁)/(1+|b|²)
//!                                   - i ∫ ds h(b) } ]
//! ```
//!
//! over planar Brownian bridges `b` from `z` to `z'`, and converges to
//! `⟨z| e^{-itH} |z'⟩` as `ν → ∞`.

mod estimator;
mod sampler;
mod weight;

pub use estimator::{
    estimate_propagator, estimate_propagator_with, nu_scan, Execution, EstimatorOptions, MCEstimate, ScanEntry, ScanRecord,
    ScanSpec,
};
pub use sampler::{path_rng, sample_bridge, BridgeSampler, StepPolicy};
pub use weight::{path_weight, stratonovich_area, WeightBreakdown};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spin::{CoherentPoint, Mode};

/// Parameters of one bridge ensemble: `b(0) = z`, `b(t) = z'`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BridgeConfig<T> {
    pub z: CoherentPoint<T>,
    pub zp: CoherentPoint<T>,
    pub t: T,
    pub nu: T,
    /// Number of time slices `K`.
    pub steps: usize,
    pub mode: Mode,
}

impl<T: Real> BridgeConfig<T> {
    pub fn new(z: CoherentPoint<T>, zp: CoherentPoint<T>, t: T, nu: T, steps: usize) -> Self {
        Self { z, zp, t, nu, steps, mode: Mode::Forward }
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t > T::zero() && self.t.is_finite()) {
            return Err(Error::InvalidParameter { name: "t", reason: format!("must be > 0, got {}", self.t) });
        }
        if !(self.nu > T::zero() && self.nu.is_finite()) {
            return Err(Error::InvalidParameter { name: "nu", reason: format!("must be > 0, got {}", self.nu) });
        }
        if self.steps < 2 {
            return Err(Error::InvalidParameter { name: "steps", reason: format!("must be >= 2, got {}", self.steps) });
        }
        if !(self.z.is_finite() && self.zp.is_finite()) {
            return Err(Error::InvalidParameter { name: "z", reason: "endpoints must be finite".into() });
        }
        Ok(())
    }

    /// `ln` of the Gaussian normalization `e^{-|z-z'|²/4tν}/(4πtν)`.
    pub fn log_prefactor(&self) -> T {
        let four = T::lit(4.0);
        let dz = CoherentPoint::new(self.z.z1 - self.zp.z1, self.z.z2 - self.zp.z2);
        -dz.norm_sqr() / (four * self.t * self.nu) - (four * T::PI() * self.t * self.nu).ln()
    }
}

/// One discretized bridge path on the uniform grid `s_k = k t / K`.
#[derive(Clone, Debug, PartialEq)]
pub struct PathSample<T> {
    pub times: Vec<T>,
    pub points: Vec<CoherentPoint<T>>,
}

impl<T: Real> PathSample<T> {
    pub fn steps(&self) -> usize {
        self.points.len() - 1
    }

    /// Same path traversed backwards in time.
    pub fn reversed(&self) -> Self {
        let t = *self.times.last().unwrap();
        let times = self.times.iter().rev().map(|s| t - *s).collect();
        let points = self.points.iter().rev().copied().collect();
        Self { times, points }
    }
}

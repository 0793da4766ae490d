use serde::Serialize;

use super::evolve::{evolve_kernel_with_potential, EvolveOptions};
use super::grid::GridSpec;
use super::operator::MagneticGridOperator;
use super::projector::{compressed_evolution, ProjectorKernel};
use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianSpec;
use crate::quadrature::PlaneQuadrature;
use crate::record::ReIm;
use crate::scalar::Real;
use crate::spin::{CoherentPoint, Mode, SpinSystem};

/// Times below this are outside the regime where the lattice kernel can be
/// compared with the compressed dynamics.
pub const T_MIN: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergenceOptions<T> {
    pub evolve: EvolveOptions,
    /// Move every pair to the nearest grid sites before evaluating.
    pub snap_to_grid: bool,
    /// `err(last)/|exact|` must fall below this.
    pub target: f64,
    /// Second grid for the truncation estimate at the last `ν`.
    pub comparison_grid: Option<GridSpec<T>>,
}

impl<T: Real> ConvergenceOptions<T> {
    /// Half-resolution comparison grid on the same box.
    pub fn for_grid(grid: &GridSpec<T>) -> Self {
        let coarse = GridSpec { half_width: grid.half_width, n: (grid.n / 2).max(16) };
        Self { evolve: EvolveOptions::default(), snap_to_grid: true, target: 0.02, comparison_grid: Some(coarse) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridRecord {
    #[serde(rename = "L")]
    pub half_width: f64,
    pub n: usize,
}

/// One `(pair, ν)` row of the report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceRecord {
    pub nu: f64,
    pub t: f64,
    pub z: ReIm,
    pub zp: ReIm,
    pub pde_value: ReIm,
    pub exact_value: ReIm,
    pub err: f64,
    pub grid: GridRecord,
    pub steps: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairSummary {
    pub z: ReIm,
    pub zp: ReIm,
    pub errors: Vec<f64>,
    pub strictly_decreasing: bool,
    pub final_relative_error: f64,
    pub meets_target: bool,
    /// `|fine - comparison|` at the last `ν`.
    pub truncation_estimate: Option<f64>,
    /// The truncation estimate exceeds the final error.
    pub truncation_dominates: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub records: Vec<ConvergenceRecord>,
    pub pairs: Vec<PairSummary>,
    /// `t < T_MIN`: nothing was evaluated.
    pub excluded: bool,
}

impl ConvergenceReport {
    pub fn all_pass(&self) -> bool {
        !self.excluded && self.pairs.iter().all(|p| p.strictly_decreasing && p.meets_target)
    }
}

/// Compares the lattice kernel `e^{-t(νR + iH)}(z, z')` with the compressed
/// evolution for every pair along an ascending `ν` list.
pub fn convergence_check<T: Real>(
    sys: &SpinSystem<T>,
    ham: &HamiltonianSpec<T>,
    grid: GridSpec<T>,
    nu_list: &[T],
    t: T,
    pairs: &[(CoherentPoint<T>, CoherentPoint<T>)],
    opts: &ConvergenceOptions<T>,
) -> Result<ConvergenceReport> {
    if nu_list.is_empty() || nu_list.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidParameter { name: "nu_list", reason: "must be non-empty and strictly ascending".into() });
    }
    if t.as_f64() < T_MIN {
        log::warn!("t = {t} below t_min = {T_MIN}; convergence check skipped");
        return Ok(ConvergenceReport { records: vec![], pairs: vec![], excluded: true });
    }
    let op = MagneticGridOperator::assemble(sys, grid)?;
    let potential = op.potential(ham)?;
    let comparison = match opts.comparison_grid {
        Some(g) => {
            let c = MagneticGridOperator::assemble(sys, g)?;
            let p = c.potential(ham)?;
            Some((c, p))
        }
        None => None,
    };
    let quad = PlaneQuadrature::for_spin(sys.two_j());
    let proj = ProjectorKernel::analytic(sys, &quad)?;
    let grid_record = GridRecord { half_width: grid.half_width.as_f64(), n: grid.n };

    let mut records = Vec::new();
    let mut summaries = Vec::new();
    for &(z0, zp0) in pairs {
        let (z, zp) = if opts.snap_to_grid { (grid.snap(z0)?, grid.snap(zp0)?) } else { (z0, zp0) };
        let exact = compressed_evolution(sys, ham, &proj, &quad, t, z, zp, Mode::Forward)?;
        let mut errors = Vec::with_capacity(nu_list.len());
        let mut last = None;
        for &nu in nu_list {
            let k = evolve_kernel_with_potential(&op, &potential, nu, t, z, zp, &opts.evolve)?;
            let err = (k.value - exact).norm();
            log::info!("nu = {nu}: pde {} exact {exact} err {err}", k.value);
            errors.push(err.as_f64());
            records.push(ConvergenceRecord {
                nu: nu.as_f64(),
                t: t.as_f64(),
                z: z.into(),
                zp: zp.into(),
                pde_value: k.value.into(),
                exact_value: exact.into(),
                err: err.as_f64(),
                grid: grid_record,
                steps: k.steps,
            });
            last = Some(k.value);
        }
        let final_err = *errors.last().unwrap();
        let truncation_estimate = match &comparison {
            Some((c, p)) => {
                let nu = *nu_list.last().unwrap();
                let k = evolve_kernel_with_potential(c, p, nu, t, z, zp, &opts.evolve)?;
                Some((k.value - last.unwrap()).norm().as_f64())
            }
            None => None,
        };
        let final_relative_error = final_err / exact.norm().as_f64();
        summaries.push(PairSummary {
            z: z.into(),
            zp: zp.into(),
            strictly_decreasing: errors.windows(2).all(|w| w[1] < w[0]),
            final_relative_error,
            meets_target: final_relative_error < opts.target,
            truncation_dominates: truncation_estimate.is_some_and(|e| e > final_err),
            truncation_estimate,
            errors,
        });
    }
    Ok(ConvergenceReport { records, pairs: summaries, excluded: false })
}

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::band::BandCholesky;
use super::operator::MagneticGridOperator;
use super::sparse::CsrMatrix;
use crate::dense::CMatrix;
use crate::error::{Error, Result};
use crate::scalar::{Real, C};

/// Lowest eigenpairs of a sparse Hermitian positive semi-definite matrix.
#[derive(Clone, Debug)]
pub struct LowSpectrum<T> {
    /// Ascending.
    pub values: Vec<T>,
    /// Unit-norm eigenvectors (Euclidean norm on the sites).
    pub vectors: Vec<Vec<C<T>>>,
    pub residuals: Vec<T>,
    pub iterations: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenOptions {
    /// Extra block columns beyond the wanted count.
    pub guard: usize,
    pub max_iterations: usize,
    /// Stop when every wanted residual `‖Rx - λx‖` is below
    /// `tolerance × λ_max(wanted)`.
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self { guard: 6, max_iterations: 500, tolerance: 1e-7, seed: 0x5eed }
    }
}

fn dot<T: Real>(u: &[C<T>], v: &[C<T>]) -> C<T> {
    u.iter().zip(v).fold(C::new(T::zero(), T::zero()), |acc, (a, b)| acc + a.conj() * b)
}

fn norm<T: Real>(u: &[C<T>]) -> T {
    u.iter().map(|a| a.norm_sqr()).sum::<T>().sqrt()
}

/// Modified Gram–Schmidt, applied twice.
fn orthonormalize<T: Real>(block: &mut [Vec<C<T>>]) {
    for _ in 0..2 {
        for i in 0..block.len() {
            let (done, rest) = block.split_at_mut(i);
            let v = &mut rest[0];
            for u in done.iter() {
                let c = dot(u, v);
                v.iter_mut().zip(u).for_each(|(x, y)| *x -= *y * c);
            }
            let nv = norm(v);
            v.iter_mut().for_each(|x| *x = *x / nv);
        }
    }
}

/// Block inverse subspace iteration with Rayleigh–Ritz on
/// `(M + shift)⁻¹`, factorized once by banded Cholesky.
pub fn lowest_eigenpairs<T: Real>(m: &CsrMatrix<T>, count: usize, opts: &EigenOptions) -> Result<LowSpectrum<T>> {
    let n = m.rows();
    let p = (count + opts.guard).min(n);
    if count == 0 || count > n {
        return Err(Error::InvalidParameter { name: "count", reason: format!("need 1..={n}, got {count}") });
    }
    // a tiny positive shift keeps the factorization definite on exact zero modes
    let shift = m.gershgorin_bound() * T::lit(1e-12);
    let chol = BandCholesky::factor(m, shift)?;

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut block: Vec<Vec<C<T>>> = (0..p)
        .map(|_| (0..n).map(|_| C::new(T::lit(rng.random_range(-1.0..1.0)), T::lit(rng.random_range(-1.0..1.0)))).collect())
        .collect();
    orthonormalize(&mut block);

    let mut values = vec![T::zero(); p];
    let mut residuals = vec![T::infinity(); p];
    for it in 1..=opts.max_iterations {
        for v in block.iter_mut() {
            chol.solve_in_place(v);
        }
        orthonormalize(&mut block);

        let images: Vec<Vec<C<T>>> = block.iter().map(|v| m.matvec(v)).collect();
        let mut h = CMatrix::from_fn(p, p, |a, b| dot(&block[a], &images[b]));
        // symmetrize rounding
        h = h.add(&h.adjoint()).scale(C::new(T::lit(0.5), T::zero()));
        let eig = h.hermitian_eigen()?;
        let rotate = |src: &[Vec<C<T>>]| -> Vec<Vec<C<T>>> {
            (0..p)
                .map(|k| {
                    let mut out = vec![C::new(T::zero(), T::zero()); n];
                    for (a, s) in src.iter().enumerate() {
                        let c = eig.vectors[(a, k)];
                        out.iter_mut().zip(s).for_each(|(o, x)| *o += *x * c);
                    }
                    out
                })
                .collect()
        };
        block = rotate(&block);
        let rimages = rotate(&images);
        values.clone_from(&eig.values);
        for k in 0..p {
            let r: Vec<C<T>> = rimages[k].iter().zip(&block[k]).map(|(a, b)| *a - *b * values[k]).collect();
            residuals[k] = norm(&r);
        }
        let scale = values[count - 1].abs().max(T::epsilon());
        let worst = residuals[..count].iter().copied().fold(T::zero(), T::max);
        if worst <= T::lit(opts.tolerance) * scale {
            block.truncate(count);
            values.truncate(count);
            residuals.truncate(count);
            return Ok(LowSpectrum { values, vectors: block, residuals, iterations: it });
        }
    }
    let worst = residuals[..count].iter().copied().fold(T::zero(), T::max);
    Err(Error::EigenNotConverged { iterations: opts.max_iterations, residual: worst.as_f64() })
}

/// Outcome of the zero-mode count.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZeroModeReport {
    pub two_j: u32,
    /// Lowest `2j + 3` eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
    pub count: usize,
    pub expected: usize,
    /// First clearly positive eigenvalue.
    pub gap_eigenvalue: f64,
    /// Largest eigenvalue counted as zero, over the gap eigenvalue.
    pub near_zero_ratio: f64,
    /// No relative jump of at least [`GAP_JUMP`] in the computed spectrum.
    pub inconclusive: bool,
}

/// Minimum relative jump `λ_{k+1}/λ_k` that marks the spectral gap.
pub const GAP_JUMP: f64 = 5.0;

/// Locates the gap in an ascending spectrum and counts the eigenvalues
/// below `gap_fraction × λ_gap`.
///
/// The gap eigenvalue is the upper end of the highest relative jump of at
/// least [`GAP_JUMP`], scanning down from the top of the computed range.
pub fn count_below_gap(eigenvalues: &[f64], gap_fraction: f64) -> (usize, f64, bool) {
    let floor = eigenvalues.last().copied().unwrap_or(0.0).abs() * 1e-300;
    let jump = (1..eigenvalues.len())
        .rev()
        .find(|&k| eigenvalues[k] >= GAP_JUMP * eigenvalues[k - 1].max(floor) && eigenvalues[k] > 0.0);
    match jump {
        Some(k) => {
            let gap = eigenvalues[k];
            let count = eigenvalues.iter().filter(|&&l| l < gap_fraction * gap).count();
            (count, gap, false)
        }
        None => (0, f64::NAN, true),
    }
}

/// Computes the lowest `2j+3` eigenvalues of `R` and counts its zero modes.
pub fn zero_mode_count<T: Real>(op: &MagneticGridOperator<T>, gap_fraction: f64) -> Result<(ZeroModeReport, LowSpectrum<T>)> {
    zero_mode_count_with(op, gap_fraction, &EigenOptions::default())
}

pub fn zero_mode_count_with<T: Real>(
    op: &MagneticGridOperator<T>,
    gap_fraction: f64,
    opts: &EigenOptions,
) -> Result<(ZeroModeReport, LowSpectrum<T>)> {
    if !(gap_fraction > 0.0 && gap_fraction < 1.0) {
        return Err(Error::InvalidParameter { name: "gap_fraction", reason: format!("must lie in (0, 1), got {gap_fraction}") });
    }
    let want = op.two_j() as usize + 3;
    let spec = lowest_eigenpairs(op.matrix(), want, opts)?;
    let eigenvalues: Vec<f64> = spec.values.iter().map(|v| v.as_f64()).collect();
    let (count, gap, inconclusive) = count_below_gap(&eigenvalues, gap_fraction);
    let near_zero_ratio = if count > 0 && !inconclusive { eigenvalues[count - 1].max(0.0) / gap } else { f64::NAN };
    if inconclusive {
        log::warn!("no spectral gap of relative size {GAP_JUMP} among {eigenvalues:?}");
    }
    let report = ZeroModeReport {
        two_j: op.two_j(),
        eigenvalues,
        count,
        expected: op.two_j() as usize + 1,
        gap_eigenvalue: gap,
        near_zero_ratio,
        inconclusive,
    };
    Ok((report, spec))
}

use serde::{Deserialize, Serialize};

use super::operator::MagneticGridOperator;
use super::sparse::CsrMatrix;
use crate::dense::{expm, CMatrix};
use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianSpec;
use crate::scalar::{cis, Real, C};
use crate::spin::CoherentPoint;

/// `e^{-x} I_k(x)` for `k = 0, 1, ...` until the terms drop below `1e-17`,
/// by Miller's backward recurrence normalized with `I₀ + 2ΣI_k = eˣ`.
pub fn scaled_bessel_i(x: f64) -> Vec<f64> {
    assert!(x > 0.0 && x.is_finite(), "Bessel argument must be positive and finite");
    let top = (14.0 * x.sqrt() + 60.0).ceil() as usize;
    let mut f = vec![0.0; top + 2];
    f[top] = 1e-280;
    for k in (1..=top).rev() {
        f[k - 1] = f[k + 1] + (2.0 * k as f64 / x) * f[k];
        if f[k - 1] > 1e250 {
            f[k - 1..].iter_mut().for_each(|v| *v *= 1e-250);
        }
    }
    let sum = f[0] + 2.0 * f[1..].iter().sum::<f64>();
    let mut out: Vec<f64> = f.iter().map(|v| v / sum).collect();
    let keep = out.iter().rposition(|v| *v > 1e-17).map_or(1, |k| k + 1);
    out.truncate(keep);
    out
}

/// Chebyshev expansion of `v ↦ e^{-τM} v` for Hermitian `M` with spectrum in
/// `[0, λ_max]`.
#[derive(Clone, Debug)]
pub struct ChebyshevExp<T> {
    coeffs: Vec<T>,
    lambda_max: T,
}

impl<T: Real> ChebyshevExp<T> {
    pub fn new(tau: T, lambda_max: T) -> Self {
        let beta = (tau * lambda_max * T::lit(0.5)).as_f64();
        if beta <= 0.0 {
            return Self { coeffs: vec![T::one()], lambda_max };
        }
        // e^{-β(1+y)} = e^{-β} [I₀(β) + 2 Σ (-1)^k I_k(β) T_k(y)]
        let coeffs = scaled_bessel_i(beta)
            .iter()
            .enumerate()
            .map(|(k, b)| {
                let c = if k == 0 { *b } else { 2.0 * b };
                T::lit(if k % 2 == 0 { c } else { -c })
            })
            .collect();
        Self { coeffs, lambda_max }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn apply(&self, m: &CsrMatrix<T>, v: &[C<T>]) -> Vec<C<T>> {
        let n = v.len();
        let zero = C::new(T::zero(), T::zero());
        let mut out: Vec<C<T>> = v.iter().map(|x| *x * self.coeffs[0]).collect();
        if self.coeffs.len() == 1 {
            return out;
        }
        let s = T::lit(2.0) / self.lambda_max;
        let mut prev = v.to_vec();
        let mut cur = vec![zero; n];
        let mut next = vec![zero; n];
        // T₁ v = (sM - 1) v
        m.matvec_into(&prev, &mut cur);
        cur.iter_mut().zip(&prev).for_each(|(c, p)| *c = *c * s - *p);
        out.iter_mut().zip(&cur).for_each(|(o, c)| *o += *c * self.coeffs[1]);
        let two_s = s + s;
        for &ck in &self.coeffs[2..] {
            m.matvec_into(&cur, &mut next);
            for i in 0..n {
                next[i] = next[i] * two_s - cur[i] - cur[i] - prev[i];
                out[i] += next[i] * ck;
            }
            std::mem::swap(&mut prev, &mut cur);
            std::mem::swap(&mut cur, &mut next);
        }
        out
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvolveMethod {
    /// Strang splitting `e^{-iΔτh/2} e^{-ΔτνR} e^{-iΔτh/2}`.
    #[default]
    Splitting,
    /// Dense scaling-and-squaring exponential; small grids only.
    DenseExpm,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvolveOptions {
    pub method: EvolveMethod,
    /// Recompute with `Δτ/2` and reject when the value moves by more
    /// than `rejection_threshold` (relative).
    pub check_halving: bool,
    pub rejection_threshold: f64,
    /// Largest interior dimension accepted by the dense route.
    pub dense_limit: usize,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self { method: EvolveMethod::Splitting, check_halving: true, rejection_threshold: 0.01, dense_limit: 1600 }
    }
}

/// `e^{-t(νR + iH)}(z, z')` on the lattice.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelResult<T> {
    pub nu: T,
    pub t: T,
    pub z: CoherentPoint<T>,
    pub zp: CoherentPoint<T>,
    pub value: C<T>,
    pub method: EvolveMethod,
    /// Splitting steps of the returned value (1 when `h` is constant).
    pub steps: usize,
    /// Relative change under step halving, when checked.
    pub halving_change: Option<T>,
}

/// Splitting step `Δτ = min(0.01/ν, t/100)`, rounded to divide `t`.
pub fn splitting_steps<T: Real>(nu: T, t: T) -> usize {
    let dt = (T::lit(0.01) / nu).min(t / T::lit(100.0));
    (t / dt).ceil().to_usize().unwrap_or(usize::MAX).max(1)
}

/// Applies `e^{-t(νR + iH)}` to a unit source at `z'` (weight
/// `1/cell_area`) and reads the result at `z`.
pub fn evolve_kernel<T: Real>(
    op: &MagneticGridOperator<T>,
    ham: &HamiltonianSpec<T>,
    nu: T,
    t: T,
    z: CoherentPoint<T>,
    zp: CoherentPoint<T>,
    opts: &EvolveOptions,
) -> Result<KernelResult<T>> {
    let potential = op.potential(ham)?;
    evolve_kernel_with_potential(op, &potential, nu, t, z, zp, opts)
}

/// As [`evolve_kernel`] with the symbol already sampled on the sites.
pub fn evolve_kernel_with_potential<T: Real>(
    op: &MagneticGridOperator<T>,
    potential: &[T],
    nu: T,
    t: T,
    z: CoherentPoint<T>,
    zp: CoherentPoint<T>,
    opts: &EvolveOptions,
) -> Result<KernelResult<T>> {
    if !(nu > T::zero() && nu.is_finite()) {
        return Err(Error::InvalidParameter { name: "nu", reason: format!("must be > 0, got {nu}") });
    }
    if !(t > T::zero() && t.is_finite()) {
        return Err(Error::InvalidParameter { name: "t", reason: format!("must be > 0, got {t}") });
    }
    if potential.len() != op.dim() {
        return Err(Error::DimensionMismatch { expected: op.dim(), found: potential.len() });
    }
    let grid = op.grid();
    let source = grid.source(zp)?;
    grid.bilinear(z)?;
    let read = |v: &[C<T>]| grid.interpolate(v, z);
    let result = |value, steps, halving_change| KernelResult {
        nu,
        t,
        z,
        zp,
        value,
        method: opts.method,
        steps,
        halving_change,
    };

    match opts.method {
        EvolveMethod::DenseExpm => {
            let n = op.dim();
            if n > opts.dense_limit {
                return Err(Error::InvalidParameter {
                    name: "method",
                    reason: format!("dense route limited to {} sites, grid has {n}", opts.dense_limit),
                });
            }
            let mut a = op.matrix().to_dense().scale(C::new(-t * nu, T::zero()));
            for (i, h) in potential.iter().enumerate() {
                a[(i, i)] += C::new(T::zero(), -t * *h);
            }
            let v = expm(&a).matvec(&source);
            Ok(result(read(&v)?, 1, None))
        }
        EvolveMethod::Splitting => {
            let lambda_max = op.matrix().gershgorin_bound();
            let (lo, hi) = potential.iter().fold((T::infinity(), T::neg_infinity()), |(l, h), p| (l.min(*p), h.max(*p)));
            if hi - lo <= T::epsilon() * (T::one() + hi.abs()) {
                // a constant symbol commutes with R: one exact step
                let cheb = ChebyshevExp::new(t * nu, lambda_max);
                let v = cheb.apply(op.matrix(), &source);
                let phase = cis(-t * lo);
                return Ok(result(read(&v)? * phase, 1, None));
            }
            let steps = splitting_steps(nu, t);
            let coarse = strang(op.matrix(), potential, &source, nu, t, steps, lambda_max);
            let value = read(&coarse)?;
            if !opts.check_halving {
                return Ok(result(value, steps, None));
            }
            let fine = strang(op.matrix(), potential, &source, nu, t, 2 * steps, lambda_max);
            let fine_value = read(&fine)?;
            let change = (fine_value - value).norm() / fine_value.norm();
            log::debug!("splitting: {steps} steps, halving change {change}");
            if !(change.as_f64() <= opts.rejection_threshold) {
                return Err(Error::StepSizeRejected { relative_change: change.as_f64() });
            }
            Ok(result(fine_value, 2 * steps, Some(change)))
        }
    }
}

fn strang<T: Real>(
    m: &CsrMatrix<T>,
    potential: &[T],
    source: &[C<T>],
    nu: T,
    t: T,
    steps: usize,
    lambda_max: T,
) -> Vec<C<T>> {
    let dt = t / T::from_usize_lossy(steps);
    let half: Vec<C<T>> = potential.iter().map(|h| cis(-dt * *h * T::lit(0.5))).collect();
    let full: Vec<C<T>> = half.iter().map(|p| *p * *p).collect();
    let cheb = ChebyshevExp::new(dt * nu, lambda_max);
    let mut v: Vec<C<T>> = source.iter().zip(&half).map(|(x, p)| *x * *p).collect();
    for k in 0..steps {
        v = cheb.apply(m, &v);
        let phase = if k + 1 == steps { &half } else { &full };
        v.iter_mut().zip(phase).for_each(|(x, p)| *x *= *p);
    }
    v
}

/// Dense `e^{-τM}` of a small sparse matrix, for tests and the dense route.
pub fn dense_semigroup<T: Real>(m: &CsrMatrix<T>, tau: T) -> CMatrix<T> {
    expm(&m.to_dense().scale(C::new(-tau, T::zero())))
}

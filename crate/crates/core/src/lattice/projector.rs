use super::eigen::LowSpectrum;
use super::grid::GridSpec;
use crate::dense::{expm, CMatrix};
use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianSpec;
use crate::quadrature::PlaneQuadrature;
use crate::scalar::{Real, C};
use crate::spin::{binomial, CoherentPoint, Mode, SpinSystem};

/// Largest admissible condition number of the analytic Gram matrix.
pub const MAX_GRAM_CONDITION: f64 = 1e6;

#[derive(Clone, Debug)]
enum Modes<T> {
    /// `φ_n(z) = c_n z̄ⁿ (1+|z|²)^{-(j+1)}`.
    Analytic { two_j: u32, coeffs: Vec<T> },
    /// Lattice eigenvectors scaled so that `h² Σ |φ|² = 1`.
    Lattice { grid: GridSpec<T>, vectors: Vec<Vec<C<T>>> },
}

/// Orthonormal basis of the zero-energy space of `R` and its kernel
/// `E₀(z, z') = Σ_n φ_n(z) φ_n*(z')`.
#[derive(Clone, Debug)]
pub struct ProjectorKernel<T> {
    modes: Modes<T>,
}

impl<T: Real> ProjectorKernel<T> {
    /// Normalizes `z̄ⁿ(1+|z|²)^{-(j+1)}` by Gram–Schmidt under `quad`.
    ///
    /// Angular integration makes the raw Gram matrix diagonal, so this
    /// only rescales; the result is checked to be the identity.
    pub fn analytic(sys: &SpinSystem<T>, quad: &PlaneQuadrature<T>) -> Result<Self> {
        let two_j = sys.two_j();
        let dim = sys.dim();
        let raw = Self { modes: Modes::Analytic { two_j, coeffs: vec![T::one(); dim] } };
        let g = raw.gram_analytic(quad);
        let diag: Vec<T> = (0..dim).map(|n| g[(n, n)].re).collect();
        let (lo, hi) = diag.iter().fold((T::infinity(), T::zero()), |(l, h), d| (l.min(*d), h.max(*d)));
        let offdiag = (0..dim)
            .flat_map(|a| (0..dim).filter(move |b| *b != a).map(move |b| (a, b)))
            .map(|(a, b)| g[(a, b)].norm() / (diag[a] * diag[b]).sqrt())
            .fold(T::zero(), T::max);
        let condition = (hi / lo).as_f64();
        if !(lo > T::zero()) || condition > MAX_GRAM_CONDITION || offdiag.as_f64() > 1e-6 {
            return Err(Error::RankDeficient { condition });
        }
        let coeffs = diag.iter().map(|d| T::one() / d.sqrt()).collect();
        Ok(Self { modes: Modes::Analytic { two_j, coeffs } })
    }

    /// Modes from the lowest `count` lattice eigenvectors.
    pub fn lattice(grid: GridSpec<T>, spectrum: &LowSpectrum<T>, count: usize) -> Result<Self> {
        if count == 0 || count > spectrum.vectors.len() {
            return Err(Error::InvalidParameter {
                name: "count",
                reason: format!("need 1..={} modes, got {count}", spectrum.vectors.len()),
            });
        }
        let inv_h = T::one() / grid.spacing();
        let vectors = spectrum.vectors[..count].iter().map(|v| v.iter().map(|x| *x * inv_h).collect()).collect();
        Ok(Self { modes: Modes::Lattice { grid, vectors } })
    }

    pub fn rank(&self) -> usize {
        match &self.modes {
            Modes::Analytic { coeffs, .. } => coeffs.len(),
            Modes::Lattice { vectors, .. } => vectors.len(),
        }
    }

    pub fn is_analytic(&self) -> bool {
        matches!(self.modes, Modes::Analytic { .. })
    }

    /// Values `φ_n(z)` of all modes.
    pub fn modes_at(&self, z: CoherentPoint<T>) -> Result<Vec<C<T>>> {
        match &self.modes {
            Modes::Analytic { two_j, coeffs } => {
                let weight = (T::one() + z.norm_sqr()).powf(-(T::lit(0.5) * T::from_usize_lossy(*two_j as usize) + T::one()));
                let zb = z.conj();
                let mut p = C::new(weight, T::zero());
                Ok(coeffs
                    .iter()
                    .map(|c| {
                        let v = p * *c;
                        p *= zb;
                        v
                    })
                    .collect())
            }
            Modes::Lattice { grid, vectors } => {
                let stencil = grid.bilinear(z)?;
                Ok(vectors.iter().map(|v| stencil.iter().fold(C::new(T::zero(), T::zero()), |acc, (i, w)| acc + v[*i] * *w)).collect())
            }
        }
    }

    /// `E₀(z, z')`.
    pub fn kernel(&self, z: CoherentPoint<T>, zp: CoherentPoint<T>) -> Result<C<T>> {
        let a = self.modes_at(z)?;
        let b = self.modes_at(zp)?;
        Ok(a.iter().zip(&b).fold(C::new(T::zero(), T::zero()), |acc, (x, y)| acc + *x * y.conj()))
    }

    fn gram_analytic(&self, quad: &PlaneQuadrature<T>) -> CMatrix<T> {
        let dim = self.rank();
        let mut g = CMatrix::zeros(dim, dim);
        for a in 0..dim {
            for b in a..dim {
                let v = quad.integrate(|z| {
                    let m = self.modes_at(z).expect("analytic modes are defined everywhere");
                    m[a].conj() * m[b]
                });
                g[(a, b)] = v;
                g[(b, a)] = v.conj();
            }
        }
        g
    }

    /// Gram matrix `∫ φ_a* φ_b`: plane quadrature for analytic modes, the
    /// lattice sum times the cell area otherwise.
    pub fn gram(&self, quad: &PlaneQuadrature<T>) -> CMatrix<T> {
        match &self.modes {
            Modes::Analytic { .. } => self.gram_analytic(quad),
            Modes::Lattice { grid, vectors } => {
                let area = grid.cell_area();
                CMatrix::from_fn(vectors.len(), vectors.len(), |a, b| {
                    vectors[a].iter().zip(&vectors[b]).fold(C::new(T::zero(), T::zero()), |acc, (x, y)| acc + x.conj() * y) * area
                })
            }
        }
    }

    /// `M_nm = ∫ φ_n* h φ_m d²z` for an analytic projector.
    pub fn compressed_matrix(&self, ham: &HamiltonianSpec<T>, quad: &PlaneQuadrature<T>) -> Result<CMatrix<T>> {
        if !self.is_analytic() {
            return Err(Error::InvalidParameter { name: "projector", reason: "compression needs the analytic projector".into() });
        }
        let symbol = ham.symbol()?;
        let dim = self.rank();
        let mut m = CMatrix::zeros(dim, dim);
        for a in 0..dim {
            for b in a..dim {
                let v = quad.integrate(|z| {
                    let modes = self.modes_at(z).expect("analytic modes are defined everywhere");
                    modes[a].conj() * modes[b] * symbol.eval(z)
                });
                m[(a, b)] = v;
                m[(b, a)] = v.conj();
            }
        }
        Ok(m)
    }
}

/// `Σ_nm φ_n(z) [e^{-itM}]_nm φ_m*(z')` with `M` the compression of the
/// symbol onto the zero modes, evaluated on `quad` and cross-checked on
/// its refinement.
pub fn compressed_evolution<T: Real>(
    sys: &SpinSystem<T>,
    ham: &HamiltonianSpec<T>,
    proj: &ProjectorKernel<T>,
    quad: &PlaneQuadrature<T>,
    t: T,
    z: CoherentPoint<T>,
    zp: CoherentPoint<T>,
    mode: Mode,
) -> Result<C<T>> {
    if proj.rank() != sys.dim() {
        return Err(Error::DimensionMismatch { expected: sys.dim(), found: proj.rank() });
    }
    let m = proj.compressed_matrix(ham, quad)?;
    let fine = proj.compressed_matrix(ham, &quad.refined())?;
    let change = m.max_abs_diff(&fine);
    let tol = T::lit(1e-9) * (T::one() + fine.max_abs());
    if !(change <= tol) {
        return Err(Error::QuadratureNotConverged { change: change.as_f64(), tolerance: tol.as_f64() });
    }
    let u = expm(&fine.scale(mode.generator_factor::<T>() * t));
    let a = proj.modes_at(z)?;
    let b: Vec<C<T>> = proj.modes_at(zp)?.iter().map(|x| x.conj()).collect();
    Ok(a.iter().zip(u.matvec(&b)).fold(C::new(T::zero(), T::zero()), |acc, (x, y)| acc + *x * y))
}

/// Exact analytic coefficient `c_n = sqrt((2j+1)/π · C(2j, n))`.
pub fn analytic_mode_coefficient<T: Real>(two_j: u32, n: u32) -> T {
    (T::from_usize_lossy(two_j as usize + 1) / T::PI() * binomial::<T>(two_j, n)).sqrt()
}

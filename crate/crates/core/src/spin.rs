//! Spin-j representation of su(2) and its non-normalized coherent vectors.
//!
//! Basis index `n = 0..=2j` is the `J3` eigenvector with eigenvalue `n - j`,
//! so index 0 is the spin-down reference vector annihilated by `J-`.

use serde::{Deserialize, Serialize};

use crate::dense::CMatrix;
use crate::error::{Error, Result};
use crate::scalar::{cplx, Real, C};

/// Point of the complex plane `z = z1 + i z2` labelling a coherent vector.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CoherentPoint<T> {
    pub z1: T,
    pub z2: T,
}

impl<T: Real> CoherentPoint<T> {
    pub fn new(z1: T, z2: T) -> Self {
        Self { z1, z2 }
    }

    pub fn origin() -> Self {
        Self::new(T::zero(), T::zero())
    }

    pub fn from_complex(z: C<T>) -> Self {
        Self::new(z.re, z.im)
    }

    #[inline]
    pub fn to_complex(self) -> C<T> {
        cplx(self.z1, self.z2)
    }

    #[inline]
    pub fn conj(self) -> C<T> {
        cplx(self.z1, -self.z2)
    }

    /// `|z|²`.
    #[inline]
    pub fn norm_sqr(self) -> T {
        self.z1 * self.z1 + self.z2 * self.z2
    }

    pub fn is_finite(self) -> bool {
        self.z1.is_finite() && self.z2.is_finite()
    }

    pub fn scale(self, s: T) -> Self {
        Self::new(self.z1 * s, self.z2 * s)
    }
}

/// Which one-parameter family is represented: `e^{-itH}`, `e^{+itH}` or the
/// Boltzmann operator `e^{-tH}`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Forward,
    Reverse,
    Boltzmann,
}

impl Mode {
    /// Factor multiplying `t·H` in the exponent: `-i`, `+i` or `-1`.
    pub fn generator_factor<T: Real>(self) -> C<T> {
        match self {
            Mode::Forward => cplx(T::zero(), -T::one()),
            Mode::Reverse => cplx(T::zero(), T::one()),
            Mode::Boltzmann => cplx(-T::one(), T::zero()),
        }
    }
}

/// Spin quantum number `j = two_j / 2` with its generator matrices.
#[derive(Clone, Debug)]
pub struct SpinSystem<T> {
    two_j: u32,
    j_plus: CMatrix<T>,
    j_minus: CMatrix<T>,
    j3: CMatrix<T>,
}

impl<T: Real> SpinSystem<T> {
    /// Builds the `(2j+1)`-dimensional irreducible representation.
    pub fn new(two_j: i64) -> Result<Self> {
        if two_j < 0 || two_j > u32::MAX as i64 {
            return Err(Error::InvalidSpin(two_j));
        }
        let two_j_u = two_j as u32;
        let dim = two_j_u as usize + 1;
        let j = T::from_u32(two_j_u).unwrap() / T::lit(2.0);
        let mut j_plus = CMatrix::zeros(dim, dim);
        for n in 0..dim.saturating_sub(1) {
            j_plus[(n + 1, n)] = cplx(ladder_element::<T>(two_j_u, n), T::zero());
        }
        let j_minus = j_plus.adjoint();
        let j3 = CMatrix::from_fn(dim, dim, |a, b| {
            if a == b {
                cplx(T::from_usize_lossy(a) - j, T::zero())
            } else {
                cplx(T::zero(), T::zero())
            }
        });
        Ok(Self { two_j: two_j_u, j_plus, j_minus, j3 })
    }

    #[inline]
    pub fn two_j(&self) -> u32 {
        self.two_j
    }

    /// The quantum number `j`.
    #[inline]
    pub fn j(&self) -> T {
        T::from_u32(self.two_j).unwrap() / T::lit(2.0)
    }

    /// `j + 1`, the factor appearing throughout the path-integral weights.
    #[inline]
    pub fn j_plus_one(&self) -> T {
        self.j() + T::one()
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.two_j as usize + 1
    }

    pub fn j_plus(&self) -> &CMatrix<T> {
        &self.j_plus
    }

    pub fn j_minus(&self) -> &CMatrix<T> {
        &self.j_minus
    }

    pub fn j3(&self) -> &CMatrix<T> {
        &self.j3
    }

    pub fn identity(&self) -> CMatrix<T> {
        CMatrix::identity(self.dim())
    }

    /// `sqrt((2j+1)/π)`.
    fn normalization(&self) -> T {
        (T::from_usize_lossy(self.dim()) / T::PI()).sqrt()
    }

    /// Non-normalized coherent vector
    /// `|z⟩ = sqrt((2j+1)/π) (1+|z|²)^{-j-1} e^{z J+} |j,-j⟩`.
    ///
    /// Component `n` is `sqrt((2j+1)/π) (1+|z|²)^{-j-1} sqrt(C(2j,n)) zⁿ`.
    pub fn coherent_vector(&self, z: CoherentPoint<T>) -> Vec<C<T>> {
        let prefactor = self.normalization() * (T::one() + z.norm_sqr()).powf(-self.j_plus_one());
        let zc = z.to_complex();
        let mut out = Vec::with_capacity(self.dim());
        let mut zn = cplx(T::one(), T::zero());
        for n in 0..self.dim() {
            out.push(zn * (prefactor * binomial::<T>(self.two_j, n as u32).sqrt()));
            zn = zn * zc;
        }
        out
    }

    /// Closed form `⟨z|z'⟩ = (2j+1)/π (1+|z|²)^{-j-1} (1+|z'|²)^{-j-1} (1 + z* z')^{2j}`.
    pub fn coherent_overlap(&self, z: CoherentPoint<T>, zp: CoherentPoint<T>) -> C<T> {
        let jp1 = self.j_plus_one();
        let radial = (T::one() + z.norm_sqr()).powf(-jp1) * (T::one() + zp.norm_sqr()).powf(-jp1);
        let base = cplx(T::one(), T::zero()) + z.conj() * zp.to_complex();
        base.powu(self.two_j) * (T::from_usize_lossy(self.dim()) / T::PI() * radial)
    }

    /// `Σ_n ⟨n|z⟩`-style pairing of two vectors in this space, `⟨u|M|v⟩`.
    pub fn sandwich(&self, u: &[C<T>], m: &CMatrix<T>, v: &[C<T>]) -> C<T> {
        crate::dense::inner(u, &m.matvec(v))
    }
}

/// `⟨n+1|J+|n⟩ = sqrt((2j-n)(n+1))`.
pub fn ladder_element<T: Real>(two_j: u32, n: usize) -> T {
    let two_j = two_j as usize;
    if n >= two_j {
        return T::zero();
    }
    (T::from_usize_lossy(two_j - n) * T::from_usize_lossy(n + 1)).sqrt()
}

/// Binomial coefficient as a floating-point value (exact for the sizes used).
pub fn binomial<T: Real>(n: u32, k: u32) -> T {
    if k > n {
        return T::zero();
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * f64::from(n - i) / f64::from(i + 1);
    }
    T::lit(acc.round())
}

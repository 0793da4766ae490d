//! Small dense complex matrices and Hermitian eigendecomposition.
//!
//! Matrices here are at most a few hundred rows (spin spaces up to
//! `2j+1 = 41`, truncated Fock spaces, toy lattices), so a cyclic Jacobi
//! sweep is both accurate and fast enough.

use std::ops::{Index, IndexMut};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{Real, C};

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<C<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![C::new(T::zero(), T::zero()); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C::new(T::one(), T::zero());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_diagonal(diag: &[C<T>]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = *d;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C<T>] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[C<T>] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<C<T>> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: C<T>) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| *x * s).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| *a + *b).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| *a - *b).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, b) in dst.iter_mut().zip(orow) {
                    *d += a * *b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[C<T>]) -> Vec<C<T>> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).fold(C::new(T::zero(), T::zero()), |acc, (a, b)| acc + *a * *b))
            .collect()
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, x| m.max(x.norm()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).fold(T::zero(), |m, (a, b)| m.max((*a - *b).norm()))
    }

    /// Max entry of `|M - M^H|`.
    pub fn hermitian_deviation(&self) -> T {
        assert!(self.is_square());
        let mut dev = T::zero();
        for i in 0..self.rows {
            for j in i..self.cols {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn trace(&self) -> C<T> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).fold(C::new(T::zero(), T::zero()), |a, b| a + b)
    }

    /// Frobenius norm.
    pub fn norm(&self) -> T {
        self.data.iter().map(|x| x.norm_sqr()).sum::<T>().sqrt()
    }

    /// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi
    /// rotations. Eigenvalues come back ascending; column `k` of the returned
    /// matrix is the normalized eigenvector of eigenvalue `k`.
    pub fn hermitian_eigen(&self) -> Result<HermitianEigen<T>> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch { expected: self.rows, found: self.cols });
        }
        let scale = self.max_abs().max(T::min_positive_value());
        let dev = self.hermitian_deviation();
        if dev > T::lit(1e-10) * scale.max(T::one()) {
            return Err(Error::NonHermitian { deviation: dev.as_f64() });
        }
        Ok(jacobi_eigen(self))
    }
}

impl<T> Index<(usize, usize)> for CMatrix<T> {
    type Output = C<T>;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for CMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C<T> {
        &mut self.data[i * self.cols + j]
    }
}

/// `A = V diag(values) V^H`.
#[derive(Clone, Debug)]
pub struct HermitianEigen<T> {
    pub values: Vec<T>,
    pub vectors: CMatrix<T>,
}

impl<T: Real> HermitianEigen<T> {
    /// `V diag(f(λ)) V^H`.
    pub fn apply_fn(&self, f: impl Fn(T) -> C<T>) -> CMatrix<T> {
        let n = self.values.len();
        let fv: Vec<C<T>> = self.values.iter().map(|&l| f(l)).collect();
        let v = &self.vectors;
        CMatrix::from_fn(n, n, |i, j| {
            let mut acc = C::new(T::zero(), T::zero());
            for k in 0..n {
                acc += v[(i, k)] * fv[k] * v[(j, k)].conj();
            }
            acc
        })
    }
}

fn jacobi_eigen<T: Real>(input: &CMatrix<T>) -> HermitianEigen<T> {
    let n = input.rows;
    let mut a = input.clone();
    // symmetrize so roundoff in the input does not bias the sweeps
    for i in 0..n {
        a[(i, i)] = C::new(a[(i, i)].re, T::zero());
        for j in (i + 1)..n {
            let avg = (a[(i, j)] + a[(j, i)].conj()) * T::lit(0.5);
            a[(i, j)] = avg;
            a[(j, i)] = avg.conj();
        }
    }
    let mut v = CMatrix::<T>::identity(n);
    let eps = T::epsilon();
    let total = a.norm().max(T::min_positive_value());

    for _sweep in 0..100 {
        let mut off = T::zero();
        for i in 0..n {
            for j in (i + 1)..n {
                off += a[(i, j)].norm_sqr();
            }
        }
        if off.sqrt() <= eps * total * T::lit(0.01) || off == T::zero() {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r <= eps * T::lit(1e-3) * total {
                    a[(p, q)] = C::new(T::zero(), T::zero());
                    a[(q, p)] = C::new(T::zero(), T::zero());
                    continue;
                }
                let phase = apq / r; // e^{iφ}
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = (aqq - app) / (T::lit(2.0) * r);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                // U = [[c, s], [-s e^{-iφ}, c e^{-iφ}]] on the (p, q) plane
                let up_q = -phase.conj() * s; // U[q][p]
                let uq_q = phase.conj() * c; // U[q][q]
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * c + akq * up_q;
                    a[(k, q)] = akp * s + akq * uq_q;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * c + aqk * up_q.conj();
                    a[(q, k)] = apk * s + aqk * uq_q.conj();
                }
                a[(p, q)] = C::new(T::zero(), T::zero());
                a[(q, p)] = C::new(T::zero(), T::zero());
                a[(p, p)] = C::new(a[(p, p)].re, T::zero());
                a[(q, q)] = C::new(a[(q, q)].re, T::zero());
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * c + vkq * up_q;
                    v[(k, q)] = vkp * s + vkq * uq_q;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = CMatrix::from_fn(n, n, |i, k| v[(i, order[k])]);
    HermitianEigen { values, vectors }
}

/// Matrix exponential of a general complex matrix by scaling and squaring
/// with a truncated Taylor series. Used for non-normal generators such as
/// `-(t)(νR + iH)` on toy lattices.
pub fn expm<T: Real>(a: &CMatrix<T>) -> CMatrix<T> {
    assert!(a.is_square());
    let n = a.rows();
    // 1-norm bound
    let mut norm1 = T::zero();
    for j in 0..n {
        let col: T = (0..n).map(|i| a[(i, j)].norm()).sum();
        norm1 = norm1.max(col);
    }
    let mut squarings = 0u32;
    let mut s = T::one();
    while norm1 / s > T::lit(0.5) {
        s = s * T::lit(2.0);
        squarings += 1;
    }
    let scaled = a.scale(C::new(T::one() / s, T::zero()));
    let mut result = CMatrix::identity(n);
    let mut term = CMatrix::identity(n);
    for k in 1..=30 {
        term = term.matmul(&scaled).scale(C::new(T::one() / T::from_usize_lossy(k), T::zero()));
        result = result.add(&term);
        if term.max_abs() <= T::epsilon() * T::lit(1e-3) {
            break;
        }
    }
    for _ in 0..squarings {
        result = result.matmul(&result);
    }
    result
}

/// `⟨u, v⟩ = Σ conj(u_i) v_i`.
pub fn inner<T: Real>(u: &[C<T>], v: &[C<T>]) -> C<T> {
    u.iter().zip(v).fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| acc + a.conj() * *b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> CMatrix<f64> {
        let g = CMatrix::from_fn(n, n, |_, _| C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        g.add(&g.adjoint())
    }

    #[test]
    fn jacobi_reconstructs_random_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [1, 2, 3, 5, 9, 17] {
            let a = random_hermitian(n, &mut rng);
            let eig = a.hermitian_eigen().unwrap();
            let back = eig.apply_fn(|l| C::new(l, 0.0));
            assert!(back.max_abs_diff(&a) < 1e-12, "n = {n}");
            let vhv = eig.vectors.adjoint().matmul(&eig.vectors);
            assert!(vhv.max_abs_diff(&CMatrix::identity(n)) < 1e-12);
            assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn jacobi_handles_degenerate_spectrum() {
        let a = CMatrix::<f64>::from_diagonal(&[C::new(2.0, 0.0), C::new(2.0, 0.0), C::new(-1.0, 0.0)]);
        let eig = a.hermitian_eigen().unwrap();
        assert_eq!(eig.values, vec![-1.0, 2.0, 2.0]);
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut a = CMatrix::<f64>::identity(2);
        a[(0, 1)] = C::new(1.0, 0.0);
        assert!(matches!(a.hermitian_eigen(), Err(Error::NonHermitian { .. })));
    }

    #[test]
    fn expm_matches_eigen_route() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = random_hermitian(6, &mut rng);
        let t = 1.7;
        let direct = expm(&h.scale(C::new(0.0, -t)));
        let via_eigen = h.hermitian_eigen().unwrap().apply_fn(|l| C::new(0.0, -t * l).exp());
        assert!(direct.max_abs_diff(&via_eigen) < 1e-11);
    }

    #[test]
    fn jacobi_works_in_single_precision() {
        let a = CMatrix::<f32>::from_fn(3, 3, |i, j| {
            if i == j {
                C::new(i as f32, 0.0)
            } else if i < j {
                C::new(0.25, 0.5)
            } else {
                C::new(0.25, -0.5)
            }
        });
        let eig = a.hermitian_eigen().unwrap();
        let back = eig.apply_fn(|l| C::new(l, 0.0));
        assert!(back.max_abs_diff(&a) < 1e-5);
    }
}

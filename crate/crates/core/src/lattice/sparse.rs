use rayon::prelude::*;

use crate::dense::CMatrix;
use crate::scalar::{Real, C};

/// Complex compressed-sparse-row matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix<T> {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C<T>>,
}

const PAR_MIN_ROWS: usize = 4096;

impl<T: Real> CsrMatrix<T> {
    /// Sums duplicate entries.
    pub fn from_triplets(n_rows: usize, n_cols: usize, mut triplets: Vec<(usize, usize, C<T>)>) -> Self {
        triplets.sort_unstable_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0; n_rows + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<C<T>> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in triplets {
            assert!(i < n_rows && j < n_cols, "triplet ({i}, {j}) out of range");
            if last == Some((i, j)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(j);
                vals.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..n_rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self { n_rows, n_cols, row_ptr, cols, vals }
    }

    pub fn rows(&self) -> usize {
        self.n_rows
    }

    pub fn cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, C<T>)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> C<T> {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[r.clone()].binary_search(&j) {
            Ok(k) => self.vals[r.start + k],
            Err(_) => C::new(T::zero(), T::zero()),
        }
    }

    fn row_dot(&self, i: usize, x: &[C<T>]) -> C<T> {
        let mut acc = C::new(T::zero(), T::zero());
        for k in self.row_ptr[i]..self.row_ptr[i + 1] {
            acc += self.vals[k] * x[self.cols[k]];
        }
        acc
    }

    /// `y = M x`.
    pub fn matvec_into(&self, x: &[C<T>], y: &mut [C<T>]) {
        assert_eq!(x.len(), self.n_cols);
        assert_eq!(y.len(), self.n_rows);
        if self.n_rows >= PAR_MIN_ROWS {
            y.par_iter_mut().enumerate().with_min_len(1024).for_each(|(i, yi)| *yi = self.row_dot(i, x));
        } else {
            for (i, yi) in y.iter_mut().enumerate() {
                *yi = self.row_dot(i, x);
            }
        }
    }

    pub fn matvec(&self, x: &[C<T>]) -> Vec<C<T>> {
        let mut y = vec![C::new(T::zero(), T::zero()); self.n_rows];
        self.matvec_into(x, &mut y);
        y
    }

    /// `max |M_ij - conj(M_ji)|`.
    pub fn hermitian_deviation(&self) -> T {
        let mut dev = T::zero();
        for i in 0..self.n_rows {
            for (j, v) in self.row(i) {
                dev = dev.max((v - self.get(j, i).conj()).norm());
            }
        }
        dev
    }

    /// Gershgorin bound on the spectral radius.
    pub fn gershgorin_bound(&self) -> T {
        (0..self.n_rows).map(|i| self.row(i).map(|(_, v)| v.norm()).sum::<T>()).fold(T::zero(), T::max)
    }

    /// Largest `|i - j|` over stored entries.
    pub fn bandwidth(&self) -> usize {
        (0..self.n_rows).flat_map(|i| self.row(i).map(move |(j, _)| i.abs_diff(j))).max().unwrap_or(0)
    }

    /// `D M D†` with `D = diag(e^{iθ})`.
    pub fn phase_conjugated(&self, theta: &[T]) -> Self {
        assert_eq!(theta.len(), self.n_rows);
        assert_eq!(self.n_rows, self.n_cols);
        let mut out = self.clone();
        for i in 0..self.n_rows {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.cols[k];
                out.vals[k] = self.vals[k] * crate::scalar::cis(theta[i] - theta[j]);
            }
        }
        out
    }

    pub fn to_dense(&self) -> CMatrix<T> {
        let mut m = CMatrix::zeros(self.n_rows, self.n_cols);
        for i in 0..self.n_rows {
            for (j, v) in self.row(i) {
                m[(i, j)] = v;
            }
        }
        m
    }

    /// `⟨x, M x⟩` (real part), for Rayleigh quotients.
    pub fn quadratic_form(&self, x: &[C<T>]) -> T {
        let y = self.matvec(x);
        x.iter().zip(&y).map(|(a, b)| (a.conj() * b).re).sum()
    }
}

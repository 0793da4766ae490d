use super::sparse::CsrMatrix;
use crate::error::{Error, Result};
use crate::scalar::{Real, C};

/// Cholesky factor `L` of a banded Hermitian positive-definite matrix,
/// stored row-wise with `L[i, i-k]` at `i * (bw + 1) + k`.
#[derive(Clone, Debug)]
pub struct BandCholesky<T> {
    n: usize,
    bw: usize,
    band: Vec<C<T>>,
}

impl<T: Real> BandCholesky<T> {
    /// Factors `M + shift·𝟙`.
    pub fn factor(m: &CsrMatrix<T>, shift: T) -> Result<Self> {
        let n = m.rows();
        let bw = m.bandwidth();
        let w = bw + 1;
        let zero = C::new(T::zero(), T::zero());
        let mut band = vec![zero; n * w];
        for i in 0..n {
            for (j, v) in m.row(i) {
                if j <= i {
                    band[i * w + (i - j)] = v;
                }
            }
            band[i * w] += C::new(shift, T::zero());
        }
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            for j in lo..=i {
                let mut s = band[i * w + (i - j)];
                let klo = lo.max(j.saturating_sub(bw));
                for k in klo..j {
                    s -= band[i * w + (i - k)] * band[j * w + (j - k)].conj();
                }
                if i == j {
                    if !(s.re > T::zero()) {
                        return Err(Error::NotPositiveDefinite { pivot: i });
                    }
                    band[i * w] = C::new(s.re.sqrt(), T::zero());
                } else {
                    band[i * w + (i - j)] = s / band[j * w].re;
                }
            }
        }
        Ok(Self { n, bw, band })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `(M + shift) x = b` in place.
    pub fn solve_in_place(&self, x: &mut [C<T>]) {
        let (n, bw, w) = (self.n, self.bw, self.bw + 1);
        assert_eq!(x.len(), n);
        for i in 0..n {
            let mut s = x[i];
            for k in i.saturating_sub(bw)..i {
                s -= self.band[i * w + (i - k)] * x[k];
            }
            x[i] = s / self.band[i * w].re;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in i + 1..(i + bw + 1).min(n) {
                s -= self.band[k * w + (k - i)].conj() * x[k];
            }
            x[i] = s / self.band[i * w].re;
        }
    }
}

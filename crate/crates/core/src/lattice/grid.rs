use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Real, C};
use crate::spin::CoherentPoint;

/// Uniform `n × n` grid on `[-L, L]²`, spacing `2L/(n-1)`.
///
/// Boundary sites carry Dirichlet data, so operators act on the
/// `(n-2)²` interior sites, indexed `(a-1)(n-2) + (b-1)` for the site
/// `(x_a, x_b)` with `a` along `z₁`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec<T> {
    #[serde(rename = "L")]
    pub half_width: T,
    pub n: usize,
}

impl<T: Real> GridSpec<T> {
    pub fn new(half_width: T, n: usize) -> Result<Self> {
        if !(half_width > T::zero() && half_width.is_finite()) {
            return Err(Error::InvalidParameter { name: "L", reason: format!("must be > 0, got {half_width}") });
        }
        if n < 16 {
            return Err(Error::InvalidParameter { name: "n", reason: format!("must be >= 16, got {n}") });
        }
        Ok(Self { half_width, n })
    }

    /// `L = 12`, `n = 128`.
    pub fn standard() -> Self {
        Self { half_width: T::lit(12.0), n: 128 }
    }

    pub fn spacing(&self) -> T {
        T::lit(2.0) * self.half_width / T::from_usize_lossy(self.n - 1)
    }

    pub fn cell_area(&self) -> T {
        let h = self.spacing();
        h * h
    }

    pub fn coord(&self, k: usize) -> T {
        -self.half_width + self.spacing() * T::from_usize_lossy(k)
    }

    pub fn site(&self, a: usize, b: usize) -> CoherentPoint<T> {
        CoherentPoint::new(self.coord(a), self.coord(b))
    }

    pub fn contains_origin(&self) -> bool {
        self.n % 2 == 1
    }

    /// Number of interior sites (unknowns).
    pub fn interior_dim(&self) -> usize {
        let m = self.n - 2;
        m * m
    }

    /// Interior index of grid site `(a, b)`, `None` on the boundary.
    pub fn interior_index(&self, a: usize, b: usize) -> Option<usize> {
        let n = self.n;
        if a == 0 || b == 0 || a >= n - 1 || b >= n - 1 {
            None
        } else {
            Some((a - 1) * (n - 2) + (b - 1))
        }
    }

    /// Grid site `(a, b)` of an interior index.
    pub fn interior_site(&self, i: usize) -> (usize, usize) {
        let m = self.n - 2;
        (i / m + 1, i % m + 1)
    }

    /// All interior points, in index order.
    pub fn interior_points(&self) -> Vec<CoherentPoint<T>> {
        (0..self.interior_dim())
            .map(|i| {
                let (a, b) = self.interior_site(i);
                self.site(a, b)
            })
            .collect()
    }

    /// Nearest grid site.
    pub fn snap(&self, z: CoherentPoint<T>) -> Result<CoherentPoint<T>> {
        self.check_inside(z)?;
        let h = self.spacing();
        let k = |x: T| ((x + self.half_width) / h).round().to_usize().unwrap_or(0).min(self.n - 1);
        Ok(self.site(k(z.z1), k(z.z2)))
    }

    fn check_inside(&self, z: CoherentPoint<T>) -> Result<()> {
        let l = self.half_width * (T::one() + T::lit(1e-12));
        if !(z.z1.abs() <= l && z.z2.abs() <= l) {
            return Err(Error::OutsideGrid { z1: z.z1.as_f64(), z2: z.z2.as_f64() });
        }
        Ok(())
    }

    /// Bilinear stencil of `z`: interior indices with their weights.
    /// Boundary corners carry zero data and are dropped.
    pub fn bilinear(&self, z: CoherentPoint<T>) -> Result<Vec<(usize, T)>> {
        self.check_inside(z)?;
        let h = self.spacing();
        let cell = |x: T| {
            let mut f = ((x + self.half_width) / h).max(T::zero());
            // land exactly on sites despite rounding in the coordinates
            let nearest = f.round();
            if (f - nearest).abs() < T::lit(1e-9) {
                f = nearest;
            }
            let a = f.floor().to_usize().unwrap_or(0).min(self.n - 2);
            (a, (f - T::from_usize_lossy(a)).min(T::one()))
        };
        let (a, r) = cell(z.z1);
        let (b, s) = cell(z.z2);
        let one = T::one();
        let corners = [
            (a, b, (one - r) * (one - s)),
            (a + 1, b, r * (one - s)),
            (a, b + 1, (one - r) * s),
            (a + 1, b + 1, r * s),
        ];
        Ok(corners
            .iter()
            .filter(|c| c.2 != T::zero())
            .filter_map(|&(p, q, w)| self.interior_index(p, q).map(|i| (i, w)))
            .collect())
    }

    /// Bilinear interpolation of interior data at `z`.
    pub fn interpolate(&self, field: &[C<T>], z: CoherentPoint<T>) -> Result<C<T>> {
        Ok(self.bilinear(z)?.into_iter().fold(C::new(T::zero(), T::zero()), |acc, (i, w)| acc + field[i] * w))
    }

    /// Lattice delta at `z`: total weight `1/cell_area` spread bilinearly.
    pub fn source(&self, z: CoherentPoint<T>) -> Result<Vec<C<T>>> {
        let mut v = vec![C::new(T::zero(), T::zero()); self.interior_dim()];
        let inv = T::one() / self.cell_area();
        for (i, w) in self.bilinear(z)? {
            v[i] += C::new(w * inv, T::zero());
        }
        Ok(v)
    }
}

use super::grid::GridSpec;
use super::sparse::CsrMatrix;
use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianSpec;
use crate::scalar::{cis, Real, C};
use crate::spin::{CoherentPoint, SpinSystem};

/// Edge phases above this magnitude are flagged as under-resolved.
pub const PHASE_RESOLUTION_LIMIT: f64 = 0.5;

/// Lattice form of `R = -(∇ - iA)² - 4(j+1)/(1+|z|²)²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Discretization {
    /// `R_h = C_h†C_h + β h² W†W`.
    ///
    /// `R = (D₁ - iD₂)†(D₁ - iD₂)` with `D = ∇ - iA`, and in this gauge
    /// `D₁ - iD₂ = w⁻¹ 2∂_z w` with `w = (1+|z|²)^{j+1}`. `C_h` applies the
    /// averaged Cauchy–Riemann stencil to `wψ` on cell centres, so the
    /// lattice functions `z̄ⁿ/w` (`n ≤ 2`) are exact zero modes.
    /// `W = w⁻¹ Δ_h w` removes the checkerboard doubler of `C_h`.
    Factorized { beta: f64 },
    /// Five-point magnetic Laplacian with Peierls link phases plus the
    /// scalar term. Its zero modes carry `O(h²)` errors comparable to the
    /// finite-box gap.
    FivePoint,
}

impl Default for Discretization {
    fn default() -> Self {
        Discretization::Factorized { beta: 0.25 }
    }
}

/// Vector potential `A = (2(j+1)z₂/(1+|z|²), -2(j+1)z₁/(1+|z|²))`.
pub fn vector_potential<T: Real>(jp1: T, z: CoherentPoint<T>) -> (T, T) {
    let f = T::lit(2.0) * jp1 / (T::one() + z.norm_sqr());
    (f * z.z2, -f * z.z1)
}

/// Scalar term `-4(j+1)/(1+|z|²)²`.
pub fn scalar_potential<T: Real>(jp1: T, z: CoherentPoint<T>) -> T {
    let d = T::one() + z.norm_sqr();
    -T::lit(4.0) * jp1 / (d * d)
}

/// Peierls phases `e^{-i∫A·dl}` (midpoint rule) on every grid edge.
#[derive(Clone, Debug, PartialEq)]
pub struct LinkField<T> {
    n: usize,
    /// Edge `(a, b) → (a+1, b)` at `a * n + b`.
    pub horizontal: Vec<C<T>>,
    /// Edge `(a, b) → (a, b+1)` at `a * (n-1) + b`.
    pub vertical: Vec<C<T>>,
    /// Largest `|∫A·dl|` over edges.
    pub max_phase: T,
}

impl<T: Real> LinkField<T> {
    pub fn new(jp1: T, grid: &GridSpec<T>) -> Self {
        let n = grid.n;
        let h = grid.spacing();
        let half = T::lit(0.5) * h;
        let mut max_phase = T::zero();
        let mut horizontal = Vec::with_capacity((n - 1) * n);
        for a in 0..n - 1 {
            for b in 0..n {
                let (a1, _) = vector_potential(jp1, CoherentPoint::new(grid.coord(a) + half, grid.coord(b)));
                let theta = a1 * h;
                max_phase = max_phase.max(theta.abs());
                horizontal.push(cis(-theta));
            }
        }
        let mut vertical = Vec::with_capacity(n * (n - 1));
        for a in 0..n {
            for b in 0..n - 1 {
                let (_, a2) = vector_potential(jp1, CoherentPoint::new(grid.coord(a), grid.coord(b) + half));
                let theta = a2 * h;
                max_phase = max_phase.max(theta.abs());
                vertical.push(cis(-theta));
            }
        }
        Self { n, horizontal, vertical, max_phase }
    }

    pub fn h(&self, a: usize, b: usize) -> C<T> {
        self.horizontal[a * self.n + b]
    }

    pub fn v(&self, a: usize, b: usize) -> C<T> {
        self.vertical[a * (self.n - 1) + b]
    }

    /// `Σ_plaquettes arg(U_b U_r U_t* U_l*) / 2π`.
    pub fn total_flux(&self) -> T {
        let mut acc = crate::scalar::KahanSum::new();
        for a in 0..self.n - 1 {
            for b in 0..self.n - 1 {
                let loop_ = self.h(a, b) * self.v(a + 1, b) * self.h(a, b + 1).conj() * self.v(a, b).conj();
                acc.add(loop_.arg());
            }
        }
        acc.value() / T::TAU()
    }

    /// Applies `U_xy → e^{iθ_x} U_xy e^{-iθ_y}` for per-site phases over the
    /// full `n × n` grid (index `a * n + b`).
    pub fn gauge_transformed(&self, theta: &[T]) -> Self {
        let n = self.n;
        assert_eq!(theta.len(), n * n);
        let mut out = self.clone();
        for a in 0..n - 1 {
            for b in 0..n {
                out.horizontal[a * n + b] = self.h(a, b) * cis(theta[a * n + b] - theta[(a + 1) * n + b]);
            }
        }
        for a in 0..n {
            for b in 0..n - 1 {
                out.vertical[a * (n - 1) + b] = self.v(a, b) * cis(theta[a * n + b] - theta[a * n + b + 1]);
            }
        }
        out
    }

    pub fn max_modulus_error(&self) -> T {
        self.horizontal.iter().chain(&self.vertical).map(|u| (u.norm() - T::one()).abs()).fold(T::zero(), T::max)
    }
}

/// Assembled lattice operator `R` on the interior sites of a grid.
#[derive(Clone, Debug)]
pub struct MagneticGridOperator<T> {
    two_j: u32,
    jp1: T,
    grid: GridSpec<T>,
    discretization: Discretization,
    links: LinkField<T>,
    scalar: Vec<T>,
    matrix: CsrMatrix<T>,
}

impl<T: Real> MagneticGridOperator<T> {
    /// Default (factorized) discretization.
    pub fn assemble(sys: &SpinSystem<T>, grid: GridSpec<T>) -> Result<Self> {
        Self::assemble_with(sys, grid, Discretization::default())
    }

    pub fn assemble_with(sys: &SpinSystem<T>, grid: GridSpec<T>, discretization: Discretization) -> Result<Self> {
        let grid = GridSpec::new(grid.half_width, grid.n)?;
        let jp1 = sys.j_plus_one();
        let links = LinkField::new(jp1, &grid);
        if links.max_phase.as_f64() > PHASE_RESOLUTION_LIMIT {
            log::warn!(
                "under-resolved link phases: max |∫A·dl| = {} > {PHASE_RESOLUTION_LIMIT} (spacing {})",
                links.max_phase,
                grid.spacing()
            );
        }
        let scalar: Vec<T> = grid.interior_points().into_iter().map(|z| scalar_potential(jp1, z)).collect();
        let matrix = match discretization {
            Discretization::Factorized { beta } => {
                if !(beta > 0.0) {
                    return Err(Error::InvalidParameter { name: "beta", reason: format!("must be > 0, got {beta}") });
                }
                assemble_factorized(jp1, &grid, T::lit(beta))
            }
            Discretization::FivePoint => assemble_five_point(&grid, &links, &scalar),
        };
        Ok(Self { two_j: sys.two_j(), jp1, grid, discretization, links, scalar, matrix })
    }

    pub fn two_j(&self) -> u32 {
        self.two_j
    }

    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    pub fn discretization(&self) -> Discretization {
        self.discretization
    }

    pub fn links(&self) -> &LinkField<T> {
        &self.links
    }

    /// Per-site scalar term `-4(j+1)/(1+|z|²)²`.
    pub fn scalar(&self) -> &[T] {
        &self.scalar
    }

    pub fn matrix(&self) -> &CsrMatrix<T> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn flux(&self) -> T {
        self.links.total_flux()
    }

    /// `2(j+1)`, the total flux of the continuum field.
    pub fn expected_flux(&self) -> T {
        T::lit(2.0) * self.jp1
    }

    pub fn phases_under_resolved(&self) -> bool {
        self.links.max_phase.as_f64() > PHASE_RESOLUTION_LIMIT
    }

    /// Operator after the site-local gauge change `ψ → e^{iθ}ψ` (interior
    /// phases; index as the interior sites).
    pub fn gauge_transformed(&self, theta: &[T]) -> Self {
        let n = self.grid.n;
        let mut full = vec![T::zero(); n * n];
        for (i, t) in theta.iter().enumerate() {
            let (a, b) = self.grid.interior_site(i);
            full[a * n + b] = *t;
        }
        Self { links: self.links.gauge_transformed(&full), matrix: self.matrix.phase_conjugated(theta), ..self.clone() }
    }

    /// Samples the symbol of `ham` on the interior sites.
    pub fn potential(&self, ham: &HamiltonianSpec<T>) -> Result<Vec<T>> {
        let symbol = ham.symbol()?;
        Ok(self.grid.interior_points().into_iter().map(|z| symbol.eval(z)).collect())
    }

    /// Rayleigh quotient `⟨ψ, Rψ⟩/⟨ψ, ψ⟩` of a function sampled on the sites.
    pub fn rayleigh_quotient(&self, f: impl Fn(CoherentPoint<T>) -> C<T>) -> T {
        let v: Vec<C<T>> = self.grid.interior_points().into_iter().map(f).collect();
        let norm: T = v.iter().map(|x| x.norm_sqr()).sum();
        self.matrix.quadratic_form(&v) / norm
    }
}

fn assemble_factorized<T: Real>(jp1: T, grid: &GridSpec<T>, beta: T) -> CsrMatrix<T> {
    let n = grid.n;
    let h = grid.spacing();
    let half = T::lit(0.5) * h;
    let weight = |z: CoherentPoint<T>| (T::one() + z.norm_sqr()).powf(jp1);
    let mut triplets = Vec::with_capacity(25 * grid.interior_dim());

    // C_h: (∂₁ - i∂₂) of wψ on the cell centre, divided by w there
    let scale = T::one() / (T::lit(2.0) * h);
    let stencil = [
        (0, 0, C::new(-T::one(), T::one())),
        (1, 0, C::new(T::one(), T::one())),
        (0, 1, C::new(-T::one(), -T::one())),
        (1, 1, C::new(T::one(), -T::one())),
    ];
    let mut row: Vec<(usize, C<T>)> = Vec::with_capacity(4);
    for a in 0..n - 1 {
        for b in 0..n - 1 {
            let wf = weight(CoherentPoint::new(grid.coord(a) + half, grid.coord(b) + half));
            row.clear();
            for &(da, db, c) in &stencil {
                if let Some(k) = grid.interior_index(a + da, b + db) {
                    row.push((k, c * (scale * weight(grid.site(a + da, b + db)) / wf)));
                }
            }
            push_gram(&mut triplets, &row, T::one());
        }
    }

    // W = w⁻¹ Δ_h w
    let inv_h2 = T::one() / (h * h);
    let wilson = beta * h * h;
    for i in 0..grid.interior_dim() {
        let (a, b) = grid.interior_site(i);
        let wi = weight(grid.site(a, b));
        row.clear();
        row.push((i, C::new(-T::lit(4.0) * inv_h2, T::zero())));
        for (p, q) in [(a + 1, b), (a - 1, b), (a, b + 1), (a, b - 1)] {
            if let Some(k) = grid.interior_index(p, q) {
                row.push((k, C::new(inv_h2 * weight(grid.site(p, q)) / wi, T::zero())));
            }
        }
        push_gram(&mut triplets, &row, wilson);
    }
    CsrMatrix::from_triplets(grid.interior_dim(), grid.interior_dim(), triplets)
}

/// Adds `s · r† r` for one sparse row `r`.
fn push_gram<T: Real>(triplets: &mut Vec<(usize, usize, C<T>)>, row: &[(usize, C<T>)], s: T) {
    for &(k, ck) in row {
        for &(l, cl) in row {
            triplets.push((k, l, ck.conj() * cl * s));
        }
    }
}

fn assemble_five_point<T: Real>(grid: &GridSpec<T>, links: &LinkField<T>, scalar: &[T]) -> CsrMatrix<T> {
    let h = grid.spacing();
    let inv_h2 = T::one() / (h * h);
    let mut triplets = Vec::with_capacity(5 * grid.interior_dim());
    for i in 0..grid.interior_dim() {
        let (a, b) = grid.interior_site(i);
        triplets.push((i, i, C::new(T::lit(4.0) * inv_h2 + scalar[i], T::zero())));
        let hops = [
            (a + 1, b, links.h(a, b)),
            (a - 1, b, links.h(a - 1, b).conj()),
            (a, b + 1, links.v(a, b)),
            (a, b - 1, links.v(a, b - 1).conj()),
        ];
        for (p, q, u) in hops {
            if let Some(k) = grid.interior_index(p, q) {
                triplets.push((i, k, -u * inv_h2));
            }
        }
    }
    CsrMatrix::from_triplets(grid.interior_dim(), grid.interior_dim(), triplets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn small(two_j: i64, disc: Discretization) -> MagneticGridOperator<f64> {
        let sys = SpinSystem::new(two_j).unwrap();
        MagneticGridOperator::assemble_with(&sys, GridSpec::new(3.0, 18).unwrap(), disc).unwrap()
    }

    #[test]
    fn both_discretizations_are_hermitian() {
        for disc in [Discretization::default(), Discretization::FivePoint] {
            for two_j in 0..=2 {
                let op = small(two_j, disc);
                assert!(op.matrix().hermitian_deviation() < 1e-12, "{disc:?}");
                assert_eq!(op.dim(), 16 * 16);
            }
        }
    }

    #[test]
    fn spin_zero_is_not_the_free_laplacian() {
        let op = small(0, Discretization::FivePoint);
        let g = op.grid();
        let i = g.interior_index(9, 9).unwrap();
        let free = 4.0 / (g.spacing() * g.spacing());
        assert!((op.matrix().get(i, i).re - free).abs() > 0.1);
        assert!(op.links().max_phase > 0.0);
        assert!(op.scalar().iter().all(|s| *s < 0.0));
    }

    #[test]
    fn link_phases_are_unimodular() {
        let op = small(3, Discretization::default());
        assert!(op.links().max_modulus_error() < 1e-14);
    }

    #[test]
    fn factorized_operator_annihilates_low_modes() {
        // χ = w ψ of degree ≤ 2 in z̄ is annihilated by the stencil, so
        // ψ = z̄ⁿ/w is a zero mode up to the boundary rows
        let sys = SpinSystem::<f64>::new(2).unwrap();
        let g = GridSpec::new(3.0, 24).unwrap();
        let op = MagneticGridOperator::assemble(&sys, g).unwrap();
        for n in 0..=2 {
            let psi: Vec<C<f64>> = g
                .interior_points()
                .into_iter()
                .map(|z| z.conj().powi(n) / (1.0 + z.norm_sqr()).powi(2))
                .collect();
            let r = op.matrix().matvec(&psi);
            for i in 0..g.interior_dim() {
                let (a, b) = g.interior_site(i);
                if a > 2 && b > 2 && a < g.n - 3 && b < g.n - 3 {
                    assert!(r[i].norm() < 1e-10, "n = {n}, site ({a}, {b}): {}", r[i]);
                }
            }
        }
    }

    #[test]
    fn gauge_transform_preserves_flux_and_hermiticity() {
        let op = small(1, Discretization::FivePoint);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let theta: Vec<f64> = (0..op.dim()).map(|_| rng.random_range(-3.0..3.0)).collect();
        let g = op.gauge_transformed(&theta);
        assert!(g.matrix().hermitian_deviation() < 1e-12);
        assert!((g.flux() - op.flux()).abs() < 1e-10);
    }

    #[test]
    fn under_resolution_flag() {
        let sys = SpinSystem::<f64>::new(40).unwrap();
        let op = MagneticGridOperator::assemble(&sys, GridSpec::new(12.0, 16).unwrap()).unwrap();
        assert!(op.phases_under_resolved());
        let sys = SpinSystem::<f64>::new(1).unwrap();
        assert!(!MagneticGridOperator::assemble(&sys, GridSpec::standard()).unwrap().phases_under_resolved());
    }
}

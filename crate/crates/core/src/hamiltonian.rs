//! Spin Hamiltonians in pseudo-diagonal form `H = ∫ d²z h(z) |z⟩⟨z|`, their
//! contravariant symbols, and exact propagator matrix elements.

use std::fmt;
use std::sync::Arc;

use crate::dense::{inner, CMatrix};
use crate::error::{Error, Result};
use crate::quadrature::PlaneQuadrature;
use crate::scalar::{cplx, Real, C};
use crate::spin::{CoherentPoint, Mode, SpinSystem};

type SymbolFn<T> = dyn Fn(CoherentPoint<T>) -> T + Send + Sync;

/// Real-valued contravariant symbol `h` on the plane.
#[derive(Clone)]
pub struct Symbol<T> {
    label: String,
    f: Arc<SymbolFn<T>>,
}

impl<T: Real> Symbol<T> {
    pub fn new(label: impl Into<String>, f: impl Fn(CoherentPoint<T>) -> T + Send + Sync + 'static) -> Self {
        Self { label: label.into(), f: Arc::new(f) }
    }

    pub fn constant(c: T) -> Self {
        Self::new(format!("{c}"), move |_| c)
    }

    #[inline]
    pub fn eval(&self, z: CoherentPoint<T>) -> T {
        (self.f)(z)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `h + c`.
    pub fn shifted(&self, c: T) -> Self {
        let f = self.f.clone();
        Self::new(format!("{} + {c}", self.label), move |z| f(z) + c)
    }
}

impl<T> fmt::Debug for Symbol<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Symbol").field(&self.label).finish()
    }
}

/// Hermitian spin Hamiltonian with (optionally) its contravariant symbol.
#[derive(Clone, Debug)]
pub struct HamiltonianSpec<T> {
    pub matrix: CMatrix<T>,
    pub symbol: Option<Symbol<T>>,
    /// `sup |h|` when a symbol is attached.
    pub symbol_bound: T,
}

impl<T: Real> HamiltonianSpec<T> {
    /// Matrix-only Hamiltonian (no symbol known).
    pub fn from_matrix(matrix: CMatrix<T>) -> Result<Self> {
        check_hermitian(&matrix)?;
        Ok(Self { matrix, symbol: None, symbol_bound: T::zero() })
    }

    /// User-supplied matrix and symbol; call [`reconstruct_from_symbol`] to
    /// cross-check that they describe the same operator.
    pub fn with_symbol(matrix: CMatrix<T>, symbol: Symbol<T>, symbol_bound: T) -> Result<Self> {
        check_hermitian(&matrix)?;
        Ok(Self { matrix, symbol: Some(symbol), symbol_bound })
    }

    /// `H ≡ 0` on the given space.
    pub fn zero(sys: &SpinSystem<T>) -> Self {
        Self {
            matrix: CMatrix::zeros(sys.dim(), sys.dim()),
            symbol: Some(Symbol::constant(T::zero())),
            symbol_bound: T::zero(),
        }
    }

    pub fn symbol(&self) -> Result<&Symbol<T>> {
        self.symbol.as_ref().ok_or(Error::MissingSymbol)
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// `H + c·𝟙`, symbol `h + c`.
    pub fn shifted(&self, c: T) -> Self {
        let n = self.dim();
        let matrix = self.matrix.add(&CMatrix::identity(n).scale(cplx(c, T::zero())));
        Self {
            matrix,
            symbol: self.symbol.as_ref().map(|s| s.shifted(c)),
            symbol_bound: self.symbol_bound + c.abs(),
        }
    }
}

fn check_hermitian<T: Real>(m: &CMatrix<T>) -> Result<()> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch { expected: m.rows(), found: m.cols() });
    }
    let dev = m.hermitian_deviation();
    if dev > T::lit(1e-12) * m.max_abs().max(T::one()) {
        return Err(Error::NonHermitian { deviation: dev.as_f64() });
    }
    Ok(())
}

/// Closed-form symbols of the generators:
/// `J3 ↔ (j+1)(|z|²-1)/(1+|z|²)`, `J+ ↔ 2(j+1) z*/(1+|z|²)`,
/// `J- ↔ 2(j+1) z/(1+|z|²)`, `𝟙 ↔ 1`.
///
/// Returns the Hamiltonian `a·J3 + b·J+ + b*·J- + c·𝟙` together with the
/// real symbol `c + a(j+1)(|z|²-1)/(1+|z|²) + 4(j+1) Re(b z*)/(1+|z|²)`.
pub fn symbol_for_generator_combo<T: Real>(sys: &SpinSystem<T>, a: T, b: C<T>, c: T) -> HamiltonianSpec<T> {
    let n = sys.dim();
    let matrix = sys
        .j3()
        .scale(cplx(a, T::zero()))
        .add(&sys.j_plus().scale(b))
        .add(&sys.j_minus().scale(b.conj()))
        .add(&CMatrix::identity(n).scale(cplx(c, T::zero())));
    let jp1 = sys.j_plus_one();
    let four = T::lit(4.0);
    let symbol = Symbol::new(
        format!("{c} + {a}·J3 + ({} + {}i)·J+ + h.c.", b.re, b.im),
        move |z: CoherentPoint<T>| {
            let u = z.norm_sqr();
            let denom = T::one() + u;
            // Re(b z*) = b1 z1 + b2 z2
            let re_bz = b.re * z.z1 + b.im * z.z2;
            c + a * jp1 * (u - T::one()) / denom + four * jp1 * re_bz / denom
        },
    );
    // 2|z|/(1+|z|²) ≤ 1
    let bound = c.abs() + a.abs() * jp1 + T::lit(2.0) * jp1 * b.norm();
    HamiltonianSpec { matrix, symbol: Some(symbol), symbol_bound: bound }
}

fn reconstruct_once<T: Real>(sys: &SpinSystem<T>, symbol: &Symbol<T>, quad: &PlaneQuadrature<T>) -> CMatrix<T> {
    let n = sys.dim();
    let mut acc = CMatrix::zeros(n, n);
    for (z, w) in quad.nodes() {
        let h = symbol.eval(*z) * *w;
        if h == T::zero() {
            continue;
        }
        let v = sys.coherent_vector(*z);
        for a in 0..n {
            let va = v[a] * h;
            for b in 0..n {
                acc[(a, b)] += va * v[b].conj();
            }
        }
    }
    acc
}

/// Quadrature approximation of `∫ d²z h(z) |z⟩⟨z|`.
///
/// The integral is evaluated with `quad` and again with both orders doubled;
/// if the two disagree by more than `tolerance` (max entry), the result is
/// rejected as unconverged. The refined result is returned.
pub fn reconstruct_from_symbol<T: Real>(
    sys: &SpinSystem<T>,
    symbol: &Symbol<T>,
    quad: &PlaneQuadrature<T>,
    tolerance: T,
) -> Result<CMatrix<T>> {
    let coarse = reconstruct_once(sys, symbol, quad);
    let fine = reconstruct_once(sys, symbol, &quad.refined());
    let change = coarse.max_abs_diff(&fine);
    if !(change <= tolerance) {
        return Err(Error::QuadratureNotConverged { change: change.as_f64(), tolerance: tolerance.as_f64() });
    }
    Ok(fine)
}

/// `e^{-itH}`, `e^{+itH}` or `e^{-tH}` via dense Hermitian eigendecomposition.
pub fn propagator<T: Real>(ham: &HamiltonianSpec<T>, t: T, mode: Mode) -> Result<CMatrix<T>> {
    check_hermitian(&ham.matrix)?;
    if t < T::zero() || !t.is_finite() {
        return Err(Error::InvalidParameter { name: "t", reason: format!("must be finite and >= 0, got {t}") });
    }
    let factor = mode.generator_factor::<T>() * t;
    let eig = ham.matrix.hermitian_eigen()?;
    Ok(eig.apply_fn(|l| (factor * l).exp()))
}

/// `⟨z| e^{-itH} |z'⟩` (or the reverse / Boltzmann variant) computed exactly.
pub fn exact_propagator_element<T: Real>(
    sys: &SpinSystem<T>,
    ham: &HamiltonianSpec<T>,
    t: T,
    z: CoherentPoint<T>,
    zp: CoherentPoint<T>,
    mode: Mode,
) -> Result<C<T>> {
    if ham.dim() != sys.dim() {
        return Err(Error::DimensionMismatch { expected: sys.dim(), found: ham.dim() });
    }
    let u = propagator(ham, t, mode)?;
    let vz = sys.coherent_vector(z);
    let vzp = sys.coherent_vector(zp);
    Ok(inner(&vz, &u.matvec(&vzp)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn quad(sys: &SpinSystem<f64>) -> PlaneQuadrature<f64> {
        PlaneQuadrature::for_spin(sys.two_j())
    }

    #[test]
    fn unit_symbol_reconstructs_identity() {
        for two_j in 0..=4 {
            let sys = SpinSystem::<f64>::new(two_j).unwrap();
            let m = reconstruct_from_symbol(&sys, &Symbol::constant(1.0), &quad(&sys), 1e-10).unwrap();
            assert!(m.max_abs_diff(&sys.identity()) < 1e-8, "2j = {two_j}");
        }
    }

    #[test]
    fn constant_symbol_is_linear() {
        let sys = SpinSystem::<f64>::new(3).unwrap();
        let m = reconstruct_from_symbol(&sys, &Symbol::constant(-2.5), &quad(&sys), 1e-10).unwrap();
        assert!(m.max_abs_diff(&sys.identity().scale(C::new(-2.5, 0.0))) < 1e-8);
    }

    #[test]
    fn j3_symbol_at_spin_half_refined_quadrature() {
        // oracle: same quadrature at doubled resolution; closed form from the
        // beta integrals is diag(n - j)
        let sys = SpinSystem::<f64>::new(1).unwrap();
        let sym = Symbol::new("J3", |z: CoherentPoint<f64>| 1.5 * (z.norm_sqr() - 1.0) / (1.0 + z.norm_sqr()));
        let q = quad(&sys);
        let m = reconstruct_from_symbol(&sys, &sym, &q, 1e-10).unwrap();
        let m2 = reconstruct_from_symbol(&sys, &sym, &q.refined(), 1e-10).unwrap();
        assert!(m.max_abs_diff(&m2) < 1e-12);
        assert!(m.max_abs_diff(sys.j3()) < 1e-8);
    }

    #[test]
    fn generator_combo_cases() {
        let sys = SpinSystem::<f64>::new(2).unwrap();
        let h = symbol_for_generator_combo(&sys, 0.0, C::new(0.0, 0.0), 5.0);
        assert!(h.matrix.max_abs_diff(&sys.identity().scale(C::new(5.0, 0.0))) < 1e-15);
        assert_eq!(h.symbol().unwrap().eval(CoherentPoint::new(0.3, 9.0)), 5.0);

        let h = symbol_for_generator_combo(&sys, 1.0, C::new(0.0, 0.0), 0.0);
        let m = reconstruct_from_symbol(&sys, h.symbol().unwrap(), &quad(&sys), 1e-8).unwrap();
        assert!(m.max_abs_diff(sys.j3()) < 1e-6);

        let half = SpinSystem::<f64>::new(1).unwrap();
        let h = symbol_for_generator_combo(&half, 0.0, C::new(0.5, 0.0), 0.0);
        let m = reconstruct_from_symbol(&half, h.symbol().unwrap(), &quad(&half), 1e-8).unwrap();
        let target = half.j_plus().add(half.j_minus()).scale(C::new(0.5, 0.0));
        assert!(m.max_abs_diff(&target) < 1e-6);
    }

    #[test]
    fn complex_b_reconstructs() {
        for two_j in 0..=4 {
            let sys = SpinSystem::<f64>::new(two_j).unwrap();
            let h = symbol_for_generator_combo(&sys, -0.7, C::new(0.3, -1.1), 0.4);
            let m = reconstruct_from_symbol(&sys, h.symbol().unwrap(), &quad(&sys), 1e-8).unwrap();
            assert!(m.max_abs_diff(&h.matrix) < 1e-6, "2j = {two_j}");
        }
    }

    #[test]
    fn symbol_bound_holds_on_samples() {
        let sys = SpinSystem::<f64>::new(3).unwrap();
        let h = symbol_for_generator_combo(&sys, 1.3, C::new(-0.2, 0.9), -0.5);
        let sym = h.symbol().unwrap();
        for k in 0..400 {
            let r = 0.05 * k as f64;
            let th = 0.37 * k as f64;
            let v = sym.eval(CoherentPoint::new(r * th.cos(), r * th.sin()));
            assert!(v.abs() <= h.symbol_bound + 1e-12);
        }
    }

    #[test]
    fn discontinuous_symbol_flags_nonconvergence() {
        let sys = SpinSystem::<f64>::new(1).unwrap();
        let sym = Symbol::new("step", |z: CoherentPoint<f64>| if z.z1 > 0.37 { 1.0 } else { 0.0 });
        let err = reconstruct_from_symbol(&sys, &sym, &PlaneQuadrature::new(8, 8), 1e-10).unwrap_err();
        assert!(matches!(err, Error::QuadratureNotConverged { .. }));
    }

    #[test]
    fn propagator_at_zero_time_is_overlap() {
        let sys = SpinSystem::<f64>::new(3).unwrap();
        let h = symbol_for_generator_combo(&sys, 0.8, C::new(0.1, 0.2), 0.3);
        let z = CoherentPoint::new(0.2, -0.4);
        let zp = CoherentPoint::new(1.1, 0.5);
        for mode in [Mode::Forward, Mode::Reverse, Mode::Boltzmann] {
            let v = exact_propagator_element(&sys, &h, 0.0, z, zp, mode).unwrap();
            assert!((v - sys.coherent_overlap(z, zp)).norm() < 1e-14);
        }
    }

    #[test]
    fn scalar_hamiltonian_phase() {
        let sys = SpinSystem::<f64>::new(2).unwrap();
        let c = 0.9;
        let h = HamiltonianSpec::from_matrix(sys.identity().scale(C::new(c, 0.0))).unwrap();
        let (z, zp) = (CoherentPoint::new(0.3, 0.1), CoherentPoint::new(-0.5, 0.7));
        let t = 1.3;
        let v = exact_propagator_element(&sys, &h, t, z, zp, Mode::Forward).unwrap();
        let expected = C::new(0.0, -t * c).exp() * sys.coherent_overlap(z, zp);
        assert!((v - expected).norm() < 1e-14);
    }

    #[test]
    fn spin_half_j3_at_origin() {
        // basis index 0 has J3 eigenvalue -1/2: ⟨0|e^{-iπJ3}|0⟩ = (2/π) e^{iπ/2}
        let sys = SpinSystem::<f64>::new(1).unwrap();
        let h = HamiltonianSpec::from_matrix(sys.j3().clone()).unwrap();
        let o = CoherentPoint::origin();
        let v = exact_propagator_element(&sys, &h, PI, o, o, Mode::Forward).unwrap();
        assert!((v - C::new(0.0, 2.0 / PI)).norm() < 1e-14);
    }

    #[test]
    fn boltzmann_and_reverse_modes() {
        let sys = SpinSystem::<f64>::new(1).unwrap();
        let h = HamiltonianSpec::from_matrix(sys.j3().clone()).unwrap();
        let o = CoherentPoint::origin();
        let b = exact_propagator_element(&sys, &h, 2.0, o, o, Mode::Boltzmann).unwrap();
        assert!((b - C::new(2.0 / PI * 1.0f64.exp(), 0.0)).norm() < 1e-13);
        let r = exact_propagator_element(&sys, &h, PI, o, o, Mode::Reverse).unwrap();
        assert!((r - C::new(0.0, -2.0 / PI)).norm() < 1e-14);
    }

    #[test]
    fn rejects_non_hermitian_and_negative_time() {
        let sys = SpinSystem::<f64>::new(1).unwrap();
        assert!(matches!(HamiltonianSpec::from_matrix(sys.j_plus().clone()), Err(Error::NonHermitian { .. })));
        let h = HamiltonianSpec::zero(&sys);
        let o = CoherentPoint::origin();
        assert!(exact_propagator_element(&sys, &h, -1.0, o, o, Mode::Forward).is_err());
    }

    #[test]
    fn propagator_from_radial_symbol_at_origin() {
        // angle-independent symbols give diagonal matrices; at z = z' = 0 only
        // the (0,0) element contributes
        for two_j in 0..=4 {
            let sys = SpinSystem::<f64>::new(two_j).unwrap();
            let h = symbol_for_generator_combo(&sys, 0.7, C::new(0.0, 0.0), -0.2);
            let t = 0.9;
            let o = CoherentPoint::origin();
            let v = exact_propagator_element(&sys, &h, t, o, o, Mode::Forward).unwrap();
            let h00 = h.matrix[(0, 0)].re;
            let expected = C::new(0.0, -t * h00).exp() * (sys.dim() as f64 / PI);
            assert!((v - expected).norm() < 1e-13);
        }
    }
}

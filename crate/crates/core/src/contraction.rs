//! High-spin contraction of su(2) onto the Heisenberg–Weyl algebra.
//!
//! Replacing `J₊ → J₊/√(2j)`, `J₋ → J₋/√(2j)`, `J₃ → J₃ + j𝟙` in a
//! polynomial Hamiltonian gives a family `𝓗_j` for which
//!
//! ```text
//! (π/2j) ⟨z/√(2j)| e^{-it𝓗_j} |z'/√(2j)⟩ → ⟨⟨z| e^{-it𝖧} |z'⟩⟩   (j → ∞)
//! ```
//!
//! with `|z⟩⟩` the normalized canonical coherent state.

use serde::Serialize;

use crate::dense::{expm, inner, CMatrix};
use crate::error::{Error, Result};
use crate::hamiltonian::{exact_propagator_element, symbol_for_generator_combo, HamiltonianSpec};
use crate::scalar::{Real, C};
use crate::spin::{CoherentPoint, Mode, SpinSystem};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Generator {
    Plus,
    Minus,
    Three,
}

/// `Σ c · g₁ g₂ ⋯` over words in the generators (empty word = `𝟙`).
#[derive(Clone, Debug, PartialEq, Default)]
pub struct GeneratorPolynomial<T> {
    pub terms: Vec<(C<T>, Vec<Generator>)>,
}

impl<T: Real> GeneratorPolynomial<T> {
    pub fn new() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn term(mut self, coeff: C<T>, word: &[Generator]) -> Self {
        self.terms.push((coeff, word.to_vec()));
        self
    }

    pub fn degree(&self) -> usize {
        self.terms.iter().map(|(_, w)| w.len()).max().unwrap_or(0)
    }

    /// Matrix on `C^{2j+1}` after the contraction substitution.
    pub fn contracted_matrix(&self, sys: &SpinSystem<T>) -> Result<CMatrix<T>> {
        if sys.two_j() == 0 {
            return Err(Error::InvalidSpin(0));
        }
        let scale = C::new(T::one() / T::from_usize_lossy(sys.two_j() as usize).sqrt(), T::zero());
        let plus = sys.j_plus().scale(scale);
        let minus = sys.j_minus().scale(scale);
        let three = sys.j3().add(&sys.identity().scale(C::new(sys.j(), T::zero())));
        let n = sys.dim();
        let mut out = CMatrix::zeros(n, n);
        for (c, word) in &self.terms {
            let mut m = sys.identity();
            for g in word {
                m = m.matmul(match g {
                    Generator::Plus => &plus,
                    Generator::Minus => &minus,
                    Generator::Three => &three,
                });
            }
            out = out.add(&m.scale(*c));
        }
        Ok(out)
    }

    /// `(a, b, c)` of `a J₃ + b J₊ + b* J₋ + c` when the polynomial is a
    /// Hermitian linear combination.
    fn linear_coefficients(&self) -> Option<(T, C<T>, T)> {
        if self.degree() > 1 {
            return None;
        }
        let zero = C::new(T::zero(), T::zero());
        let (mut a, mut bp, mut bm, mut c) = (zero, zero, zero, zero);
        for (k, w) in &self.terms {
            match w.first() {
                None => c += *k,
                Some(Generator::Three) => a += *k,
                Some(Generator::Plus) => bp += *k,
                Some(Generator::Minus) => bm += *k,
            }
        }
        let tol = T::lit(1e-14);
        if a.im.abs() > tol || c.im.abs() > tol || (bp - bm.conj()).norm() > tol {
            return None;
        }
        Some((a.re, bp, c.re))
    }
}

/// Closed-form or oracle propagator of the limiting oscillator Hamiltonian.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CanonicalReference {
    /// `𝖧 = a†a`.
    NumberOperator,
    /// `𝖧 = (a + a†)/√2`.
    Displacement,
}

/// A contraction experiment: polynomial, spin ladder and reference.
#[derive(Clone, Debug, PartialEq)]
pub struct ContractionCase<T> {
    pub name: &'static str,
    pub polynomial: GeneratorPolynomial<T>,
    pub reference: CanonicalReference,
    pub ladder: Vec<u32>,
}

impl<T: Real> ContractionCase<T> {
    /// `J₃`, contracting to `diag(0, 1, …, 2j)` and then `a†a`.
    pub fn number_operator() -> Self {
        Self {
            name: "number",
            polynomial: GeneratorPolynomial::new().term(C::new(T::one(), T::zero()), &[Generator::Three]),
            reference: CanonicalReference::NumberOperator,
            ladder: vec![10, 20, 40],
        }
    }

    /// `(J₊ + J₋)/√2`, contracting to `(a + a†)/√2`.
    pub fn displacement() -> Self {
        let c = C::new(T::one() / T::lit(2.0).sqrt(), T::zero());
        Self {
            name: "displacement",
            polynomial: GeneratorPolynomial::new().term(c, &[Generator::Plus]).term(c, &[Generator::Minus]),
            reference: CanonicalReference::Displacement,
            ladder: vec![10, 20, 40],
        }
    }

    /// `⟨⟨z| e^{-it𝖧} |z'⟩⟩`.
    pub fn reference_value(&self, z: C<T>, zp: C<T>, t: T) -> C<T> {
        canonical_propagator(self.reference, z, zp, t)
    }
}

/// `⟨⟨z|z'⟩⟩ = exp(-(|z|² + |z'|²)/2 + z* z')`.
pub fn canonical_overlap<T: Real>(z: C<T>, zp: C<T>) -> C<T> {
    let half = T::lit(0.5);
    (C::new(-(z.norm_sqr() + zp.norm_sqr()) * half, T::zero()) + z.conj() * zp).exp()
}

/// Closed forms: `a†a` gives `exp(-(|z|²+|z'|²)/2 + z* z' e^{-it})`;
/// `(a+a†)/√2` gives the displacement `D(α)`, `α = -it/√2`.
pub fn canonical_propagator<T: Real>(reference: CanonicalReference, z: C<T>, zp: C<T>, t: T) -> C<T> {
    let half = T::lit(0.5);
    match reference {
        CanonicalReference::NumberOperator => {
            let rot = C::new(T::zero(), -t).exp();
            (C::new(-(z.norm_sqr() + zp.norm_sqr()) * half, T::zero()) + z.conj() * zp * rot).exp()
        }
        CanonicalReference::Displacement => {
            // D(α)|z'⟩⟩ = e^{(α z'* - α* z')/2} |z' + α⟩⟩
            let alpha = C::new(T::zero(), -t / T::lit(2.0).sqrt());
            let phase = ((alpha * zp.conj() - alpha.conj() * zp) * half).exp();
            phase * canonical_overlap(z, zp + alpha)
        }
    }
}

/// Truncated Fock-space oracle: `Σ c_n(z)* [e^{-it𝖧}]_nm c_m(z')` with
/// `c_n(z) = e^{-|z|²/2} zⁿ/√n!` on `dim` levels.
pub fn fock_propagator<T: Real>(reference: CanonicalReference, z: C<T>, zp: C<T>, t: T, dim: usize) -> C<T> {
    let zero = C::new(T::zero(), T::zero());
    let h = match reference {
        CanonicalReference::NumberOperator => {
            CMatrix::from_diagonal(&(0..dim).map(|n| C::new(T::from_usize_lossy(n), T::zero())).collect::<Vec<_>>())
        }
        CanonicalReference::Displacement => {
            let r = T::one() / T::lit(2.0).sqrt();
            CMatrix::from_fn(dim, dim, |a, b| {
                if a == b + 1 {
                    C::new(T::from_usize_lossy(a).sqrt() * r, T::zero())
                } else if b == a + 1 {
                    C::new(T::from_usize_lossy(b).sqrt() * r, T::zero())
                } else {
                    zero
                }
            })
        }
    };
    let u = expm(&h.scale(C::new(T::zero(), -t)));
    let coherent = |w: C<T>| -> Vec<C<T>> {
        let mut out = Vec::with_capacity(dim);
        let mut c = C::new((-w.norm_sqr() * T::lit(0.5)).exp(), T::zero());
        for n in 0..dim {
            out.push(c);
            c = c * w / T::from_usize_lossy(n + 1).sqrt();
        }
        out
    };
    inner(&coherent(z), &u.matvec(&coherent(zp)))
}

/// `𝓗_j` as a Hamiltonian; linear cases also carry their symbol.
pub fn contracted_hamiltonian<T: Real>(sys: &SpinSystem<T>, case: &ContractionCase<T>) -> Result<HamiltonianSpec<T>> {
    let matrix = case.polynomial.contracted_matrix(sys)?;
    match case.polynomial.linear_coefficients() {
        Some((a, b, c)) => {
            // a(J₃ + j) + (b J₊ + b* J₋)/√(2j) + c
            let s = T::one() / T::from_usize_lossy(sys.two_j() as usize).sqrt();
            let ham = symbol_for_generator_combo(sys, a, b * s, c + a * sys.j());
            debug_assert!(ham.matrix.max_abs_diff(&matrix) < T::lit(1e-10));
            Ok(ham)
        }
        None => HamiltonianSpec::from_matrix(matrix),
    }
}

/// `(π/2j) ⟨z/√(2j)| e^{-it𝓗_j} |z'/√(2j)⟩`.
pub fn prelimit_value<T: Real>(case: &ContractionCase<T>, two_j: u32, z: C<T>, zp: C<T>, t: T) -> Result<C<T>> {
    let sys = SpinSystem::new(i64::from(two_j))?;
    if two_j == 0 {
        return Err(Error::InvalidSpin(0));
    }
    let ham = contracted_hamiltonian(&sys, case)?;
    let s = T::one() / T::from_usize_lossy(two_j as usize).sqrt();
    let p = CoherentPoint::from_complex(z * s);
    let q = CoherentPoint::from_complex(zp * s);
    let v = exact_propagator_element(&sys, &ham, t, p, q, Mode::Forward)?;
    Ok(v * (T::PI() / T::from_usize_lossy(two_j as usize)))
}

/// `|prelimit - reference|`.
pub fn contraction_gap<T: Real>(case: &ContractionCase<T>, two_j: u32, z: C<T>, zp: C<T>, t: T) -> Result<T> {
    Ok((prelimit_value(case, two_j, z, zp, t)? - case.reference_value(z, zp, t)).norm())
}

/// One row of a ladder report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LadderRecord {
    pub two_j: u32,
    pub t: f64,
    pub z: crate::record::ReIm,
    pub zp: crate::record::ReIm,
    pub prelimit_re: f64,
    pub prelimit_im: f64,
    pub reference_re: f64,
    pub reference_im: f64,
    pub gap: f64,
}

/// Evaluates the case along its ladder.
pub fn contraction_ladder<T: Real>(case: &ContractionCase<T>, z: C<T>, zp: C<T>, t: T) -> Result<Vec<LadderRecord>> {
    let reference = case.reference_value(z, zp, t);
    case.ladder
        .iter()
        .map(|&two_j| {
            let pre = prelimit_value(case, two_j, z, zp, t)?;
            Ok(LadderRecord {
                two_j,
                t: t.as_f64(),
                z: z.into(),
                zp: zp.into(),
                prelimit_re: pre.re.as_f64(),
                prelimit_im: pre.im.as_f64(),
                reference_re: reference.re.as_f64(),
                reference_im: reference.im.as_f64(),
                gap: (pre - reference).norm().as_f64(),
            })
        })
        .collect()
}

/// `h_j(z/√(2j))` for a linear case; tends to the canonical upper symbol.
pub fn rescaled_symbol<T: Real>(case: &ContractionCase<T>, two_j: u32, z: C<T>) -> Result<T> {
    let sys = SpinSystem::new(i64::from(two_j))?;
    let ham = contracted_hamiltonian(&sys, case)?;
    let s = T::one() / T::from_usize_lossy(two_j.max(1) as usize).sqrt();
    Ok(ham.symbol()?.eval(CoherentPoint::from_complex(z * s)))
}

/// Upper symbol of the limiting operator: `|z|² - 1` for `a†a`,
/// `√2 Re z` for `(a + a†)/√2`.
pub fn canonical_upper_symbol<T: Real>(reference: CanonicalReference, z: C<T>) -> T {
    match reference {
        CanonicalReference::NumberOperator => z.norm_sqr() - T::one(),
        CanonicalReference::Displacement => T::lit(2.0).sqrt() * z.re,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C<f64> {
        C::new(re, im)
    }

    #[test]
    fn number_case_is_diagonal_ramp() {
        let sys = SpinSystem::<f64>::new(2).unwrap();
        let m = ContractionCase::number_operator().polynomial.contracted_matrix(&sys).unwrap();
        let expect = CMatrix::from_diagonal(&[c(0.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)]);
        assert!(m.max_abs_diff(&expect) < 1e-15);
    }

    #[test]
    fn raising_operator_at_spin_half() {
        let sys = SpinSystem::<f64>::new(1).unwrap();
        let p = GeneratorPolynomial::new().term(c(1.0, 0.0), &[Generator::Plus]);
        let m = p.contracted_matrix(&sys).unwrap();
        assert!((m[(1, 0)] - c(1.0, 0.0)).norm() < 1e-15);
        assert_eq!(m[(0, 1)], c(0.0, 0.0));
        assert_eq!(m[(0, 0)], c(0.0, 0.0));
    }

    #[test]
    fn quadratic_polynomial_has_no_symbol_but_is_hermitian() {
        let p = GeneratorPolynomial::new()
            .term(c(1.0, 0.0), &[Generator::Plus, Generator::Minus])
            .term(c(0.3, 0.0), &[Generator::Three, Generator::Three]);
        let case = ContractionCase { name: "quad", polynomial: p, reference: CanonicalReference::NumberOperator, ladder: vec![4] };
        let sys = SpinSystem::<f64>::new(4).unwrap();
        let h = contracted_hamiltonian(&sys, &case).unwrap();
        assert!(h.symbol.is_none());
        assert!(h.matrix.hermitian_deviation() < 1e-14);
    }

    #[test]
    fn spin_zero_cannot_be_contracted() {
        assert!(prelimit_value(&ContractionCase::<f64>::number_operator(), 0, c(0.0, 0.0), c(0.0, 0.0), 0.0).is_err());
    }

    #[test]
    fn closed_forms_match_fock_oracle() {
        for reference in [CanonicalReference::NumberOperator, CanonicalReference::Displacement] {
            for (z, zp, t) in [(c(0.5, 0.0), c(0.5, 0.0), std::f64::consts::FRAC_PI_2), (c(0.4, 0.0), c(0.0, 0.2), 0.0), (c(-0.3, 0.7), c(0.6, -0.1), 1.3)] {
                let a = canonical_propagator(reference, z, zp, t);
                let b = fock_propagator(reference, z, zp, t, 64);
                assert!((a - b).norm() < 1e-12, "{reference:?}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn canonical_state_is_normalized() {
        for z in [c(0.0, 0.0), c(1.5, -0.4), c(-2.0, 2.0)] {
            assert!((canonical_overlap(z, z) - c(1.0, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn origin_gap_is_one_over_two_j() {
        let case = ContractionCase::<f64>::number_operator();
        for two_j in [2, 5, 10] {
            let g = contraction_gap(&case, two_j, c(0.0, 0.0), c(0.0, 0.0), 0.0).unwrap();
            assert!((g - 1.0 / two_j as f64).abs() < 1e-13);
        }
    }

    #[test]
    fn linear_cases_carry_consistent_symbols() {
        for case in [ContractionCase::<f64>::number_operator(), ContractionCase::displacement()] {
            let sys = SpinSystem::<f64>::new(6).unwrap();
            let h = contracted_hamiltonian(&sys, &case).unwrap();
            assert!(h.symbol.is_some());
            assert!(h.matrix.max_abs_diff(&case.polynomial.contracted_matrix(&sys).unwrap()) < 1e-12);
        }
    }

    #[test]
    fn number_case_ladders_decrease() {
        let case = ContractionCase::<f64>::number_operator();
        let g = |two_j, z, zp, t| contraction_gap(&case, two_j, z, zp, t).unwrap();
        assert!(g(20, c(0.4, 0.0), c(0.0, 0.2), 0.0) < g(10, c(0.4, 0.0), c(0.0, 0.2), 0.0));
        let t = std::f64::consts::FRAC_PI_2;
        let z = c(0.5, 0.0);
        let gaps: Vec<_> = [10, 20, 40].iter().map(|&k| g(k, z, z, t)).collect();
        assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{gaps:?}");
        let reference = (-z.norm_sqr() + z.norm_sqr() * C::new(0.0, -t).exp()).exp();
        assert!((case.reference_value(z, z, t) - reference).norm() < 1e-15);
    }

    #[test]
    fn displacement_case_converges() {
        let case = ContractionCase::<f64>::displacement();
        let records = contraction_ladder(&case, c(0.3, -0.2), c(0.1, 0.4), 0.8).unwrap();
        assert!(records.windows(2).all(|w| w[1].gap < w[0].gap));
        assert!(records[2].gap < 0.05);
    }

    #[test]
    fn ladder_record_fields() {
        let case = ContractionCase::<f64>::number_operator();
        let r = contraction_ladder(&case, c(0.0, 0.0), c(0.0, 0.0), 0.0).unwrap();
        let v = serde_json::to_value(&r[0]).unwrap();
        for k in ["two_j", "t", "z", "zp", "prelimit_re", "prelimit_im", "reference_re", "reference_im", "gap"] {
            assert!(v.get(k).is_some(), "{k}");
        }
        assert!((r[0].gap - 0.1).abs() < 1e-13);
    }

    #[test]
    fn number_symbol_limit_is_shifted_modulus() {
        let case = ContractionCase::<f64>::number_operator();
        for z in [c(0.0, 0.0), c(0.7, -0.2), c(1.5, 1.0)] {
            let target = canonical_upper_symbol(CanonicalReference::NumberOperator, z);
            let e1 = (rescaled_symbol(&case, 1000, z).unwrap() - target).abs();
            let e2 = (rescaled_symbol(&case, 2000, z).unwrap() - target).abs();
            assert!(e2 < 1e-2 && (e2 < 1e-14 || e2 < e1 * 0.6), "{z}: {e1} {e2}");
        }
    }

    #[test]
    fn gap_ratio_leaves_the_half_band_where_the_leading_term_cancels() {
        let case = ContractionCase::<f64>::number_operator();
        let (z, zp) = (c(-0.5293, 0.5138), c(0.4768, -0.4769));
        assert!(leading_coefficient(z, zp) < 0.1);
        let r = contraction_gap(&case, 20, z, zp, 0.0).unwrap() / contraction_gap(&case, 10, z, zp, 0.0).unwrap();
        assert!(r < 0.3, "{r}");
    }

    #[test]
    fn displacement_symbol_limit() {
        let case = ContractionCase::<f64>::displacement();
        let z = c(0.8, -0.3);
        let target = canonical_upper_symbol(CanonicalReference::Displacement, z);
        assert!((rescaled_symbol(&case, 4000, z).unwrap() - target).abs() < 1e-3);
    }

    use proptest::prelude::*;

    fn disc(radius: f64) -> impl Strategy<Value = C<f64>> {
        (0.0..radius, 0.0..std::f64::consts::TAU).prop_map(|(r, a)| C::from_polar(r, a))
    }

    // 2j·gap/|ref| → |1 - w²/2 + (a² + b²)/4 - (a + b)|, w = z*z', a = |z|², b = |z'|²
    fn leading_coefficient(z: C<f64>, zp: C<f64>) -> f64 {
        let (w, a, b) = (z.conj() * zp, z.norm_sqr(), zp.norm_sqr());
        (C::new(1.0 + (a * a + b * b) / 4.0 - a - b, 0.0) - w * w / 2.0).norm()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn overlap_gap_halves_with_doubled_spin(two_j in 10u32..40, z in disc(0.5), zp in disc(0.5)) {
            let case = ContractionCase::<f64>::number_operator();
            let a = contraction_gap(&case, two_j, z, zp, 0.0).unwrap();
            let b = contraction_gap(&case, 2 * two_j, z, zp, 0.0).unwrap();
            prop_assume!(a > 1e-12);
            prop_assert!((0.3..=0.7).contains(&(b / a)), "ratio {}", b / a);
        }

        #[test]
        fn overlap_gap_follows_leading_coefficient(z in disc(1.0), zp in disc(1.0)) {
            let two_j = 2000u32;
            let sys = SpinSystem::<f64>::new(i64::from(two_j)).unwrap();
            let s = 1.0 / f64::from(two_j).sqrt();
            let pre = sys.coherent_overlap(CoherentPoint::from_complex(z * s), CoherentPoint::from_complex(zp * s))
                * (std::f64::consts::PI / f64::from(two_j));
            let reference = canonical_overlap(z, zp);
            let scaled = f64::from(two_j) * (pre - reference).norm() / reference.norm();
            prop_assert!((scaled - leading_coefficient(z, zp)).abs() < 0.02, "{scaled} vs {}", leading_coefficient(z, zp));
        }

        #[test]
        fn contracted_propagators_are_unitary(two_j in 1u32..30, t in 0.0..3.0f64, disp in any::<bool>()) {
            let case = if disp { ContractionCase::<f64>::displacement() } else { ContractionCase::number_operator() };
            let sys = SpinSystem::<f64>::new(i64::from(two_j)).unwrap();
            let h = contracted_hamiltonian(&sys, &case).unwrap();
            prop_assert!(h.matrix.hermitian_deviation() < 1e-12);
            let u = crate::hamiltonian::propagator(&h, t, Mode::Forward).unwrap();
            let dev = u.adjoint().matmul(&u).max_abs_diff(&CMatrix::identity(sys.dim()));
            prop_assert!(dev < 1e-10);
        }
    }
}

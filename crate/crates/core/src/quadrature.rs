//! Quadrature over the whole complex plane.
//!
//! The radial variable `u = |z|²` is compactified by `u = w/(1-w)` and
//! integrated with Gauss–Legendre nodes in `w ∈ [0, 1)`; the angle uses the
//! uniform trapezoid rule, which is exact for Fourier modes `|k| < order`.
//! Integrands of the form `zᵃ z*ᵇ (1+|z|²)^{-2j-2}` become polynomials in
//! `w`, so moderate orders integrate them to machine precision.

use crate::scalar::{Real, C};
use crate::spin::CoherentPoint;

/// Gauss–Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre_unit<T: Real>(order: usize) -> (Vec<T>, Vec<T>) {
    assert!(order >= 1, "quadrature order must be positive");
    let n = order;
    let mut nodes = vec![T::zero(); n];
    let mut weights = vec![T::zero(); n];
    let half = T::lit(0.5);
    for i in 0..n.div_ceil(2) {
        // Newton from the Chebyshev-like initial guess, in f64 then cast
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // map [-1, 1] -> [0, 1]
        nodes[i] = half * (T::one() - T::lit(x));
        nodes[n - 1 - i] = half * (T::one() + T::lit(x));
        weights[i] = half * T::lit(w);
        weights[n - 1 - i] = half * T::lit(w);
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Product rule for `∫ d²z f(z)` over the plane.
#[derive(Clone, Debug)]
pub struct PlaneQuadrature<T> {
    radial_order: usize,
    angular_order: usize,
    /// `(point, weight)` for every node; weights already include `d²z`.
    nodes: Vec<(CoherentPoint<T>, T)>,
}

impl<T: Real> PlaneQuadrature<T> {
    pub fn new(radial_order: usize, angular_order: usize) -> Self {
        assert!(angular_order >= 1);
        let (w, gw) = gauss_legendre_unit::<T>(radial_order);
        let dtheta = T::TAU() / T::from_usize_lossy(angular_order);
        let half = T::lit(0.5);
        let mut nodes = Vec::with_capacity(radial_order * angular_order);
        for (wi, gi) in w.iter().zip(&gw) {
            let one_minus = T::one() - *wi;
            let u = *wi / one_minus;
            let r = u.sqrt();
            // d²z = r dr dθ = ½ du dθ, du = dw / (1-w)²
            let radial_weight = half * *gi / (one_minus * one_minus);
            for k in 0..angular_order {
                let theta = dtheta * T::from_usize_lossy(k);
                nodes.push((CoherentPoint::new(r * theta.cos(), r * theta.sin()), radial_weight * dtheta));
            }
        }
        Self { radial_order, angular_order, nodes }
    }

    /// Rule sized for spin `j = two_j/2`: angular order `≥ 4j + 4`.
    pub fn for_spin(two_j: u32) -> Self {
        let angular = (2 * two_j as usize + 4).max(16);
        Self::new(64, angular)
    }

    /// Same rule with both orders doubled, for convergence checks.
    pub fn refined(&self) -> Self {
        Self::new(2 * self.radial_order, 2 * self.angular_order)
    }

    pub fn radial_order(&self) -> usize {
        self.radial_order
    }

    pub fn angular_order(&self) -> usize {
        self.angular_order
    }

    pub fn nodes(&self) -> &[(CoherentPoint<T>, T)] {
        &self.nodes
    }

    pub fn integrate_real(&self, f: impl Fn(CoherentPoint<T>) -> T) -> T {
        let mut acc = crate::scalar::KahanSum::new();
        for (p, w) in &self.nodes {
            acc.add(f(*p) * *w);
        }
        acc.value()
    }

    pub fn integrate(&self, f: impl Fn(CoherentPoint<T>) -> C<T>) -> C<T> {
        let mut re = crate::scalar::KahanSum::new();
        let mut im = crate::scalar::KahanSum::new();
        for (p, w) in &self.nodes {
            let v = f(*p);
            re.add(v.re * *w);
            im.add(v.im * *w);
        }
        C::new(re.value(), im.value())
    }
}

use super::{BridgeConfig, PathSample};
use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianSpec;
use crate::scalar::{Real, C};
use crate::spin::SpinSystem;

/// Midpoint (Fisk–Stratonovich) value of `∮ (b₁ db₂ - b₂ db₁)/(1+|b|²)`.
pub fn stratonovich_area<T: Real>(path: &PathSample<T>) -> T {
    let half = T::lit(0.5);
    let mut acc = crate::scalar::KahanSum::new();
    for w in path.points.windows(2) {
        let (a, b) = (w[0], w[1]);
        let m1 = half * (a.z1 + b.z1);
        let m2 = half * (a.z2 + b.z2);
        let d1 = b.z1 - a.z1;
        let d2 = b.z2 - a.z2;
        acc.add((m1 * d2 - m2 * d1) / (T::one() + m1 * m1 + m2 * m2));
    }
    acc.value()
}

/// The pieces of the complex log-weight of one path.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightBreakdown<T> {
    /// `4(j+1)ν ∫ ds (1+|b|²)^{-2}`.
    pub confining: T,
    /// `2(j+1) × stratonovich_area`; enters the exponent multiplied by `i`.
    pub kinematic: T,
    /// `-i∫h`, `+i∫h` or `-∫h` depending on the mode.
    pub dynamical: C<T>,
    /// `-|z-z'|²/(4tν) - ln(4πtν)`.
    pub log_prefactor: T,
}

impl<T: Real> WeightBreakdown<T> {
    /// Log of the path weight without the Gaussian prefactor.
    pub fn log_weight(&self) -> C<T> {
        C::new(self.confining, self.kinematic) + self.dynamical
    }

    /// Magnitude guarded by the exponent cap.
    pub fn exponent_size(&self) -> T {
        self.confining + self.dynamical.norm()
    }
}

/// Evaluates all integrals of the path weight on the time grid: trapezoid
/// rule for the confining and dynamical terms, midpoint rule for the
/// stochastic line integral.
pub fn path_weight<T: Real>(
    sys: &SpinSystem<T>,
    ham: &HamiltonianSpec<T>,
    cfg: &BridgeConfig<T>,
    path: &PathSample<T>,
) -> Result<WeightBreakdown<T>> {
    if ham.dim() != sys.dim() {
        return Err(Error::DimensionMismatch { expected: sys.dim(), found: ham.dim() });
    }
    let symbol = ham.symbol()?;
    let jp1 = sys.j_plus_one();
    let half = T::lit(0.5);

    let mut conf = crate::scalar::KahanSum::new();
    let mut dynamic = crate::scalar::KahanSum::new();
    let mut prev: Option<(T, T, T)> = None;
    for (s, b) in path.times.iter().zip(&path.points) {
        let u = b.norm_sqr();
        let f = T::one() / ((T::one() + u) * (T::one() + u));
        let h = symbol.eval(*b);
        if let Some((s0, f0, h0)) = prev {
            let ds = *s - s0;
            conf.add(half * ds * (f0 + f));
            dynamic.add(half * ds * (h0 + h));
        }
        prev = Some((*s, f, h));
    }

    let confining = T::lit(4.0) * jp1 * cfg.nu * conf.value();
    let kinematic = T::lit(2.0) * jp1 * stratonovich_area(path);
    let dynamical = cfg.mode.generator_factor::<T>() * dynamic.value();
    Ok(WeightBreakdown { confining, kinematic, dynamical, log_prefactor: cfg.log_prefactor() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bridge::{path_rng, sample_bridge};
    use crate::hamiltonian::symbol_for_generator_combo;
    use crate::spin::{CoherentPoint, Mode};
    use std::f64::consts::PI;

    fn circle(radius: f64, k: usize) -> PathSample<f64> {
        let t = 1.0;
        let times: Vec<f64> = (0..=k).map(|i| t * i as f64 / k as f64).collect();
        let points = times.iter().map(|s| CoherentPoint::new(radius * (2.0 * PI * s).cos(), radius * (2.0 * PI * s).sin())).collect();
        PathSample { times, points }
    }

    #[test]
    fn constant_path_has_no_area() {
        let k = 10;
        let p = PathSample { times: (0..=k).map(|i| i as f64).collect(), points: vec![CoherentPoint::new(0.3, 0.2); k + 1] };
        assert_eq!(stratonovich_area(&p), 0.0);
    }

    #[test]
    fn circle_area_matches_line_integral() {
        // ∮ (b₁db₂ - b₂db₁)/(1+|b|²) = 2πR²/(1+R²) on the circle of radius R
        for r in [0.5, 1.0, 2.0] {
            let exact = 2.0 * PI * r * r / (1.0 + r * r);
            let a = stratonovich_area(&circle(r, 10_000));
            assert!((a - exact).abs() < 1e-6, "R = {r}: {a} vs {exact}");
        }
        assert!((stratonovich_area(&circle(1.0, 10_000)) - PI).abs() < 1e-6);
    }

    #[test]
    fn reversing_flips_area_sign() {
        let cfg = BridgeConfig::new(CoherentPoint::new(0.1, 0.2), CoherentPoint::new(-0.4, 0.9), 1.0, 2.0, 200);
        let p = sample_bridge(&cfg, &mut path_rng(3, 0));
        assert_eq!(stratonovich_area(&p), -stratonovich_area(&p.reversed()));
    }

    #[test]
    fn zero_symbol_has_no_dynamical_term() {
        let sys = SpinSystem::<f64>::new(2).unwrap();
        let ham = HamiltonianSpec::zero(&sys);
        let cfg = BridgeConfig::new(CoherentPoint::origin(), CoherentPoint::new(0.5, 0.5), 0.5, 1.0, 100);
        let p = sample_bridge(&cfg, &mut path_rng(0, 0));
        let w = path_weight(&sys, &ham, &cfg, &p).unwrap();
        assert_eq!(w.dynamical, C::new(0.0, 0.0));
    }

    #[test]
    fn constant_path_at_origin() {
        let two_j = 3;
        let sys = SpinSystem::<f64>::new(two_j).unwrap();
        let c = 0.7;
        let ham = symbol_for_generator_combo(&sys, 0.0, C::new(0.0, 0.0), c);
        let (t, nu, k) = (0.8, 1.5, 40);
        let cfg = BridgeConfig::new(CoherentPoint::origin(), CoherentPoint::origin(), t, nu, k);
        let p = PathSample { times: (0..=k).map(|i| t * i as f64 / k as f64).collect(), points: vec![CoherentPoint::origin(); k + 1] };
        let w = path_weight(&sys, &ham, &cfg, &p).unwrap();
        let jp1 = 2.5;
        assert!((w.confining - 4.0 * jp1 * nu * t).abs() < 1e-12);
        assert_eq!(w.kinematic, 0.0);
        assert!((w.dynamical - C::new(0.0, -c * t)).norm() < 1e-12);
    }

    #[test]
    fn boltzmann_mode_nonpositive_for_nonnegative_symbol() {
        let sys = SpinSystem::<f64>::new(1).unwrap();
        // J3 + 3/2: symbol 1.5 (|z|²-1)/(1+|z|²) + 1.5 ≥ 0
        let ham = symbol_for_generator_combo(&sys, 1.0, C::new(0.0, 0.0), 1.5);
        let cfg = BridgeConfig::new(CoherentPoint::new(0.2, 0.0), CoherentPoint::new(0.0, -0.6), 1.0, 2.0, 300)
            .with_mode(Mode::Boltzmann);
        for i in 0..20 {
            let p = sample_bridge(&cfg, &mut path_rng(4, i));
            let w = path_weight(&sys, &ham, &cfg, &p).unwrap();
            assert_eq!(w.dynamical.im, 0.0);
            assert!(w.dynamical.re <= 0.0);
            assert!(w.log_weight().exp().norm() <= w.confining.exp() * (1.0 + 1e-12));
            assert!(w.confining > 0.0 && w.confining <= 4.0 * 1.5 * 2.0 * 1.0 + 1e-12);
        }
    }

    #[test]
    fn constant_shift_factorizes_pathwise() {
        let sys = SpinSystem::<f64>::new(2).unwrap();
        let ham = symbol_for_generator_combo(&sys, 0.4, C::new(0.2, -0.1), 0.0);
        let shifted = ham.shifted(1.25);
        let cfg = BridgeConfig::new(CoherentPoint::new(0.2, 0.1), CoherentPoint::new(-0.3, 0.3), 0.6, 3.0, 128);
        for i in 0..10 {
            let p = sample_bridge(&cfg, &mut path_rng(8, i));
            let w0 = path_weight(&sys, &ham, &cfg, &p).unwrap();
            let w1 = path_weight(&sys, &shifted, &cfg, &p).unwrap();
            let ratio = w1.log_weight().exp() / w0.log_weight().exp();
            assert!((ratio - C::new(0.0, -0.6 * 1.25).exp()).norm() < 1e-12);
        }
    }

    #[test]
    fn missing_symbol_is_an_error() {
        let sys = SpinSystem::<f64>::new(1).unwrap();
        let ham = HamiltonianSpec::from_matrix(sys.j3().clone()).unwrap();
        let cfg = BridgeConfig::new(CoherentPoint::origin(), CoherentPoint::origin(), 1.0, 1.0, 4);
        let p = sample_bridge(&cfg, &mut path_rng(0, 0));
        assert_eq!(path_weight(&sys, &ham, &cfg, &p).unwrap_err(), Error::MissingSymbol);
    }
}

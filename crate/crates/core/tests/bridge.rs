use proptest::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use spinbridge::bridge::{
    estimate_propagator, estimate_propagator_with, path_rng, path_weight, sample_bridge, BridgeConfig,
    EstimatorOptions, Execution, StepPolicy,
};
use spinbridge::{symbol_for_generator_combo, CoherentPoint64, Complex64, HamiltonianSpec64, Mode, SpinSystem64};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn j3(sys: &SpinSystem64) -> HamiltonianSpec64 {
    symbol_for_generator_combo(sys, 1.0, c(0.0, 0.0), 0.0)
}

fn serial() -> EstimatorOptions {
    EstimatorOptions { execution: Execution::Serial, ..EstimatorOptions::default() }
}

/// Pearson statistic of `xs` (assumed standard normal) over `bins`
/// equiprobable cells.
fn chi_square(xs: &[f64], bins: usize) -> f64 {
    let normal = Normal::standard();
    let edges: Vec<f64> = (1..bins).map(|k| normal.inverse_cdf(k as f64 / bins as f64)).collect();
    let mut counts = vec![0usize; bins];
    for &x in xs {
        counts[edges.partition_point(|&e| e < x)] += 1;
    }
    let expect = xs.len() as f64 / bins as f64;
    counts.iter().map(|&n| (n as f64 - expect).powi(2) / expect).sum()
}

#[test]
fn bridge_marginals_follow_the_gaussian_law() {
    let (z, zp) = (CoherentPoint64::new(0.3, -0.4), CoherentPoint64::new(-0.5, 0.2));
    let (t, nu, k) = (0.8, 1.5, 8);
    let cfg = BridgeConfig::new(z, zp, t, nu, k);
    let n = 100_000;
    let paths: Vec<_> = (0..n).map(|i| sample_bridge(&cfg, &mut path_rng(41, i as u64))).collect();

    let mean = |s: f64, a: f64, b: f64| a + (b - a) * s / t;
    let var = |s: f64| 2.0 * nu * s * (t - s) / t;
    let bins = 20;
    let critical = ChiSquared::new((bins - 1) as f64).unwrap().inverse_cdf(0.99);
    for idx in [2, 4, 7] {
        let s = t * idx as f64 / k as f64;
        let sd = var(s).sqrt();
        let x1: Vec<f64> = paths.iter().map(|p| (p.points[idx].z1 - mean(s, z.z1, zp.z1)) / sd).collect();
        let x2: Vec<f64> = paths.iter().map(|p| (p.points[idx].z2 - mean(s, z.z2, zp.z2)) / sd).collect();
        for (name, xs) in [("z1", &x1), ("z2", &x2)] {
            let stat = chi_square(xs, bins);
            assert!(stat < critical, "s={s} {name}: chi-square {stat} vs {critical}");
        }
    }

    // cov(b(s₁), b(s₂)) = 2ν s₁(t - s₂)/t per coordinate, zero across coordinates
    let (i1, i2) = (2, 6);
    let (s1, s2) = (t * i1 as f64 / k as f64, t * i2 as f64 / k as f64);
    let d1: Vec<f64> = paths.iter().map(|p| p.points[i1].z1 - mean(s1, z.z1, zp.z1)).collect();
    let d2: Vec<f64> = paths.iter().map(|p| p.points[i2].z1 - mean(s2, z.z1, zp.z1)).collect();
    let e2: Vec<f64> = paths.iter().map(|p| p.points[i2].z2 - mean(s2, z.z2, zp.z2)).collect();
    let cov = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / n as f64;
    let expect = 2.0 * nu * s1 * (t - s2) / t;
    let se = (var(s1) * var(s2) + expect * expect).sqrt() / (n as f64).sqrt();
    assert!((cov(&d1, &d2) - expect).abs() < 5.0 * se, "{} vs {expect}", cov(&d1, &d2));
    assert!(cov(&d1, &e2).abs() < 5.0 * (var(s1) * var(s2)).sqrt() / (n as f64).sqrt());
}

#[test]
fn reversed_path_weight_is_the_conjugate() {
    let sys = SpinSystem64::new(3).unwrap();
    let h = symbol_for_generator_combo(&sys, 0.6, c(-0.3, 0.5), 0.2);
    let cfg = BridgeConfig::new(CoherentPoint64::new(0.2, 0.7), CoherentPoint64::new(-0.4, -0.1), 0.6, 2.0, 256);
    let back = BridgeConfig::new(cfg.zp, cfg.z, cfg.t, cfg.nu, cfg.steps).with_mode(Mode::Reverse);
    for i in 0..50 {
        let p = sample_bridge(&cfg, &mut path_rng(42, i));
        let fwd = path_weight(&sys, &h, &cfg, &p).unwrap().log_weight();
        let rev = path_weight(&sys, &h, &back, &p.reversed()).unwrap().log_weight();
        assert!((fwd.conj() - rev).norm() < 1e-11, "{fwd} vs {rev}");
    }
}

#[test]
fn swapped_endpoints_estimate_the_conjugate() {
    let sys = SpinSystem64::new(1).unwrap();
    let h = j3(&sys);
    let (z, zp, t, nu) = (CoherentPoint64::new(0.3, 0.0), CoherentPoint64::new(0.0, -0.2), 0.25, 2.0);
    let steps = StepPolicy::default().steps(nu, t, sys.j_plus_one());
    let fwd = estimate_propagator(&sys, &h, &BridgeConfig::new(z, zp, t, nu, steps), 20_000, 43).unwrap();
    let back = BridgeConfig::new(zp, z, t, nu, steps).with_mode(Mode::Reverse);
    let rev = estimate_propagator(&sys, &h, &back, 20_000, 44).unwrap();
    let se = (fwd.stderr.powi(2) + rev.stderr.powi(2)).sqrt();
    assert!((fwd.value.conj() - rev.value).norm() < 4.0 * se, "{} vs {}", fwd.value, rev.value);
}

#[test]
fn constant_symbol_factors_out_at_the_same_seed() {
    let sys = SpinSystem64::new(2).unwrap();
    let (t, v) = (0.7, 1.3);
    let cfg = BridgeConfig::new(CoherentPoint64::new(0.1, 0.4), CoherentPoint64::new(0.5, -0.2), t, 3.0, 1000);
    let free = estimate_propagator_with(&sys, &HamiltonianSpec64::zero(&sys), &cfg, 2000, 45, &serial()).unwrap();
    let shifted = symbol_for_generator_combo(&sys, 0.0, c(0.0, 0.0), v);
    let moved = estimate_propagator_with(&sys, &shifted, &cfg, 2000, 45, &serial()).unwrap();
    let phase = c(0.0, -t * v).exp();
    assert!((moved.value - phase * free.value).norm() < 1e-12 * free.value.norm());
    assert!((moved.stderr - free.stderr).abs() < 1e-12 * free.stderr);
}

#[test]
fn estimate_is_stable_under_step_doubling() {
    let sys = SpinSystem64::new(1).unwrap();
    let h = j3(&sys);
    let base = BridgeConfig::new(CoherentPoint64::new(0.3, 0.0), CoherentPoint64::new(0.0, -0.2), 0.25, 2.0, 1000);
    let coarse = estimate_propagator(&sys, &h, &base, 20_000, 46).unwrap();
    let fine = estimate_propagator(&sys, &h, &BridgeConfig { steps: 2000, ..base }, 20_000, 47).unwrap();
    let se = (coarse.stderr.powi(2) + fine.stderr.powi(2)).sqrt();
    assert!((coarse.value - fine.value).norm() < 4.0 * se, "{} vs {}", coarse.value, fine.value);
}

#[test]
fn short_time_estimate_is_the_heat_kernel() {
    // At fixed ν the measure concentrates on z' as t → 0: the estimate
    // tends to (4πνt)⁻¹ on the diagonal and vanishes off it.
    let sys = SpinSystem64::new(1).unwrap();
    let h = j3(&sys);
    let (t, nu) = (1e-3, 1.0);
    let z = CoherentPoint64::new(0.3, 0.0);
    let steps = StepPolicy::default().steps(nu, t, sys.j_plus_one());
    let diag = estimate_propagator(&sys, &h, &BridgeConfig::new(z, z, t, nu, steps), 20_000, 48).unwrap();
    let u = z.norm_sqr();
    let symbol = h.symbol().unwrap().eval(z);
    let expect = c(4.0 * sys.j_plus_one() * nu * t / ((1.0 + u) * (1.0 + u)), -t * symbol).exp()
        / (4.0 * std::f64::consts::PI * nu * t);
    assert!((diag.value - expect).norm() < 3.0 * diag.stderr + 2e-3 * expect.norm(), "{} vs {expect}", diag.value);

    let zp = CoherentPoint64::new(0.0, -0.2);
    let off = estimate_propagator(&sys, &h, &BridgeConfig::new(z, zp, t, nu, steps), 2000, 49).unwrap();
    assert!(off.value.norm() < 1e-10, "{}", off.value);
}

#[test]
#[ignore = "does not hold at fixed nu: as t -> 0 the bridge measure concentrates and the estimate tends to the heat kernel, not the overlap"]
fn short_time_estimate_is_the_overlap() {
    let sys = SpinSystem64::new(1).unwrap();
    let h = j3(&sys);
    let (z, zp, t) = (CoherentPoint64::new(0.3, 0.0), CoherentPoint64::new(0.0, -0.2), 1e-3);
    let overlap = sys.coherent_overlap(z, zp);
    for nu in [1.0, 2.0, 4.0, 8.0] {
        let steps = StepPolicy::default().steps(nu, t, sys.j_plus_one());
        let est = estimate_propagator(&sys, &h, &BridgeConfig::new(z, zp, t, nu, steps), 20_000, 50).unwrap();
        assert!((est.value - overlap).norm() < 3.0 * est.stderr, "ν={nu}: {} vs {overlap}", est.value);
    }
}

#[test]
#[ignore = "does not hold: for j = 0 the fixed-nu value depends on nu (about 0.478 at nu = 2), see the acceptance criterion 6(a) line"]
fn spin_zero_scan_is_nu_independent() {
    let sys = SpinSystem64::new(0).unwrap();
    let zero = HamiltonianSpec64::zero(&sys);
    let o = CoherentPoint64::origin();
    for nu in [1.0, 2.0, 4.0] {
        let steps = StepPolicy::default().steps(nu, 0.25, sys.j_plus_one());
        let est = estimate_propagator(&sys, &zero, &BridgeConfig::new(o, o, 0.25, nu, steps), 50_000, 51).unwrap();
        let gap = (est.value - c(1.0 / std::f64::consts::PI, 0.0)).norm();
        assert!(gap < 3.0 * est.stderr, "ν={nu}: {} ± {}", est.value, est.stderr);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn boltzmann_weight_of_a_nonnegative_symbol_is_damping(
        seed in any::<u64>(),
        (x, y, xp, yp) in (-1.5..1.5f64, -1.5..1.5f64, -1.5..1.5f64, -1.5..1.5f64),
        t in 0.05..2.0f64,
        nu in 0.2..5.0f64,
    ) {
        let sys = SpinSystem64::new(2).unwrap();
        let h = symbol_for_generator_combo(&sys, 0.8, c(0.3, -0.2), 0.0);
        let h = h.shifted(h.symbol_bound);
        let cfg = BridgeConfig::new(CoherentPoint64::new(x, y), CoherentPoint64::new(xp, yp), t, nu, 128)
            .with_mode(Mode::Boltzmann);
        let p = sample_bridge(&cfg, &mut path_rng(seed, 0));
        let w = path_weight(&sys, &h, &cfg, &p).unwrap();
        prop_assert_eq!(w.dynamical.im, 0.0);
        prop_assert!(w.dynamical.re <= 0.0);
    }
}

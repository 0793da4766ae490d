use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use super::sampler::{path_rng, BridgeSampler, StepPolicy};
use super::weight::path_weight;
use super::{BridgeConfig, PathSample};
use crate::error::{Error, Result};
use crate::hamiltonian::{exact_propagator_element, HamiltonianSpec};
use crate::scalar::{KahanSum, Real, C};
use crate::spin::SpinSystem;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    #[default]
    Parallel,
    Serial,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EstimatorOptions {
    /// Abort when `confining + |dynamical|` of any path exceeds this.
    pub exponent_cap: f64,
    /// Pair every path with its reflection through the mean path.
    pub antithetic: bool,
    pub execution: Execution,
    /// Paths per reduction chunk; fixes the summation order.
    pub chunk: usize,
}

impl Default for EstimatorOptions {
    fn default() -> Self {
        Self { exponent_cap: 50.0, antithetic: false, execution: Execution::Parallel, chunk: 256 }
    }
}

/// Monte Carlo estimate of one propagator element.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MCEstimate<T> {
    pub value: C<T>,
    /// `sqrt(Var Re + Var Im) / sqrt(n)` of the sample mean.
    pub stderr: T,
    pub n_paths: usize,
    pub nu: T,
    pub steps: usize,
    pub seed: u64,
    /// Largest `confining + |dynamical|` seen.
    pub max_exponent: T,
}

/// Compensated sums and Welford moments of complex samples.
#[derive(Clone, Copy, Debug)]
struct Moments<T> {
    n: usize,
    sum_re: KahanSum<T>,
    sum_im: KahanSum<T>,
    mean_re: T,
    mean_im: T,
    m2_re: T,
    m2_im: T,
    max_exponent: T,
}

impl<T: Real> Moments<T> {
    fn new() -> Self {
        Self {
            n: 0,
            sum_re: KahanSum::new(),
            sum_im: KahanSum::new(),
            mean_re: T::zero(),
            mean_im: T::zero(),
            m2_re: T::zero(),
            m2_im: T::zero(),
            max_exponent: T::zero(),
        }
    }

    fn push(&mut self, x: C<T>) {
        self.n += 1;
        let n = T::from_usize_lossy(self.n);
        self.sum_re.add(x.re);
        self.sum_im.add(x.im);
        let d_re = x.re - self.mean_re;
        let d_im = x.im - self.mean_im;
        self.mean_re += d_re / n;
        self.mean_im += d_im / n;
        self.m2_re += d_re * (x.re - self.mean_re);
        self.m2_im += d_im * (x.im - self.mean_im);
    }

    fn merge(&mut self, o: &Self) {
        if o.n == 0 {
            return;
        }
        let (na, nb) = (T::from_usize_lossy(self.n), T::from_usize_lossy(o.n));
        let n = na + nb;
        let d_re = o.mean_re - self.mean_re;
        let d_im = o.mean_im - self.mean_im;
        self.m2_re += o.m2_re + d_re * d_re * na * nb / n;
        self.m2_im += o.m2_im + d_im * d_im * na * nb / n;
        self.mean_re += d_re * nb / n;
        self.mean_im += d_im * nb / n;
        self.sum_re.merge(&o.sum_re);
        self.sum_im.merge(&o.sum_im);
        self.n += o.n;
        self.max_exponent = self.max_exponent.max(o.max_exponent);
    }
}

fn run_chunk<T: Real>(
    sys: &SpinSystem<T>,
    ham: &HamiltonianSpec<T>,
    cfg: &BridgeConfig<T>,
    seed: u64,
    samples: std::ops::Range<usize>,
    opts: &EstimatorOptions,
) -> Result<Moments<T>>
where
    StandardNormal: Distribution<T>,
{
    let cap = T::lit(opts.exponent_cap);
    let mut sampler = BridgeSampler::new();
    let mut path = PathSample { times: Vec::with_capacity(cfg.steps + 1), points: Vec::with_capacity(cfg.steps + 1) };
    let mut acc = Moments::<T>::new();
    let signs: &[f64] = if opts.antithetic { &[1.0, -1.0] } else { &[1.0] };
    for i in samples {
        let mut rng = path_rng(seed, i as u64);
        sampler.draw_variates(cfg.steps, &mut rng);
        let mut sample = C::new(T::zero(), T::zero());
        for &s in signs {
            sampler.build_into(cfg, T::lit(s), &mut path);
            let w = path_weight(sys, ham, cfg, &path)?;
            let size = w.exponent_size();
            if !(size <= cap) {
                return Err(Error::ExponentCap {
                    exponent: size.as_f64(),
                    cap: opts.exponent_cap,
                    nu_t_j: (cfg.nu * cfg.t * sys.j_plus_one()).as_f64(),
                });
            }
            acc.max_exponent = acc.max_exponent.max(size);
            sample += w.log_weight().exp();
        }
        acc.push(sample / T::from_usize_lossy(signs.len()));
    }
    Ok(acc)
}

/// Estimates `⟨z| e^{-itH} |z'⟩` (or the mode's variant) from `n_paths`
/// bridges with default options.
pub fn estimate_propagator<T: Real>(
    sys: &SpinSystem<T>,
    ham: &HamiltonianSpec<T>,
    cfg: &BridgeConfig<T>,
    n_paths: usize,
    seed: u64,
) -> Result<MCEstimate<T>>
where
    StandardNormal: Distribution<T>,
{
    estimate_propagator_with(sys, ham, cfg, n_paths, seed, &EstimatorOptions::default())
}

/// As [`estimate_propagator`]. Path `i` always uses stream `i` of `seed` and
/// chunks are merged in index order, so serial and parallel execution give
/// bit-identical results.
///
/// With `antithetic`, `n_paths` is rounded up to an even number and each
/// stream yields one path and its reflection.
pub fn estimate_propagator_with<T: Real>(
    sys: &SpinSystem<T>,
    ham: &HamiltonianSpec<T>,
    cfg: &BridgeConfig<T>,
    n_paths: usize,
    seed: u64,
    opts: &EstimatorOptions,
) -> Result<MCEstimate<T>>
where
    StandardNormal: Distribution<T>,
{
    cfg.validate()?;
    if ham.dim() != sys.dim() {
        return Err(Error::DimensionMismatch { expected: sys.dim(), found: ham.dim() });
    }
    ham.symbol()?;
    let samples = if opts.antithetic { n_paths.div_ceil(2) } else { n_paths };
    if samples < 2 {
        return Err(Error::InvalidParameter { name: "n_paths", reason: format!("need at least 2 samples, got {n_paths}") });
    }
    if opts.chunk == 0 {
        return Err(Error::InvalidParameter { name: "chunk", reason: "must be positive".into() });
    }
    let chunks: Vec<_> = (0..samples.div_ceil(opts.chunk))
        .map(|c| c * opts.chunk..((c + 1) * opts.chunk).min(samples))
        .collect();
    let partial: Vec<Result<Moments<T>>> = match opts.execution {
        Execution::Parallel => {
            chunks.into_par_iter().map(|r| run_chunk(sys, ham, cfg, seed, r, opts)).collect()
        }
        Execution::Serial => chunks.into_iter().map(|r| run_chunk(sys, ham, cfg, seed, r, opts)).collect(),
    };
    let mut total = Moments::new();
    for p in partial {
        total.merge(&p?);
    }

    let n = T::from_usize_lossy(total.n);
    let norm = cfg.log_prefactor().exp();
    let mean = C::new(total.sum_re.value(), total.sum_im.value()) / n;
    let var = (total.m2_re + total.m2_im) / (n - T::one());
    let paths = if opts.antithetic { 2 * samples } else { samples };
    log::debug!("bridge estimate: {paths} paths, K = {}, max exponent {}", cfg.steps, total.max_exponent);
    Ok(MCEstimate {
        value: mean * norm,
        stderr: norm * (var / n).sqrt(),
        n_paths: paths,
        nu: cfg.nu,
        steps: cfg.steps,
        seed,
        max_exponent: total.max_exponent,
    })
}

/// A sequence of diffusion constants to estimate at.
#[derive(Clone, Debug, PartialEq)]
pub struct ScanSpec<T> {
    pub nu_list: Vec<T>,
    /// One entry for all `ν`, or one per `ν`.
    pub paths: Vec<usize>,
    pub policy: StepPolicy,
    /// Overrides the policy with a fixed `K` when set.
    pub steps: Option<usize>,
}

impl<T: Real> ScanSpec<T> {
    pub fn new(nu_list: Vec<T>, n_paths: usize) -> Self {
        Self { nu_list, paths: vec![n_paths], policy: StepPolicy::default(), steps: None }
    }

    fn paths_for(&self, i: usize) -> usize {
        if self.paths.len() == 1 {
            self.paths[0]
        } else {
            self.paths[i]
        }
    }
}

/// One point of a `ν` scan.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanEntry<T> {
    pub estimate: MCEstimate<T>,
    pub exact: C<T>,
    /// `|estimate - exact|`.
    pub gap: T,
    /// The gap is within one standard error.
    pub inconclusive: bool,
}

/// Flat record of a scan entry, for JSON and CSV output.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanRecord {
    pub nu: f64,
    pub steps: usize,
    pub n_paths: usize,
    pub seed: u64,
    pub value_re: f64,
    pub value_im: f64,
    pub stderr: f64,
    pub exact_re: f64,
    pub exact_im: f64,
    pub gap: f64,
    pub inconclusive: bool,
}

impl<T: Real> ScanEntry<T> {
    pub fn record(&self) -> ScanRecord {
        let e = &self.estimate;
        ScanRecord {
            nu: e.nu.as_f64(),
            steps: e.steps,
            n_paths: e.n_paths,
            seed: e.seed,
            value_re: e.value.re.as_f64(),
            value_im: e.value.im.as_f64(),
            stderr: e.stderr.as_f64(),
            exact_re: self.exact.re.as_f64(),
            exact_im: self.exact.im.as_f64(),
            gap: self.gap.as_f64(),
            inconclusive: self.inconclusive,
        }
    }
}

/// Runs the estimator at every `ν` of the scan against the exact element.
/// The `nu` and `steps` of `base` are replaced per entry.
pub fn nu_scan<T: Real>(
    sys: &SpinSystem<T>,
    ham: &HamiltonianSpec<T>,
    base: &BridgeConfig<T>,
    scan: &ScanSpec<T>,
    seed: u64,
    opts: &EstimatorOptions,
) -> Result<Vec<ScanEntry<T>>>
where
    StandardNormal: Distribution<T>,
{
    if scan.paths.len() != 1 && scan.paths.len() != scan.nu_list.len() {
        return Err(Error::DimensionMismatch { expected: scan.nu_list.len(), found: scan.paths.len() });
    }
    let exact = exact_propagator_element(sys, ham, base.t, base.z, base.zp, base.mode)?;
    let mut out = Vec::with_capacity(scan.nu_list.len());
    for (i, &nu) in scan.nu_list.iter().enumerate() {
        let steps = scan.steps.unwrap_or_else(|| scan.policy.steps(nu, base.t, sys.j_plus_one()));
        let cfg = BridgeConfig { nu, steps, ..*base };
        let estimate = estimate_propagator_with(sys, ham, &cfg, scan.paths_for(i), seed, opts)?;
        let gap = (estimate.value - exact).norm();
        log::info!("nu = {nu}: K = {steps}, gap {gap}, stderr {}", estimate.stderr);
        out.push(ScanEntry { estimate, exact, gap, inconclusive: estimate.stderr >= gap });
    }
    Ok(out)
}

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{BridgeConfig, PathSample};
use crate::scalar::Real;
use crate::spin::CoherentPoint;

/// Time-slice rule `K = max(k_min, ceil(c ν t (j+1)))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepPolicy {
    pub k_min: usize,
    pub c: f64,
}

impl Default for StepPolicy {
    fn default() -> Self {
        Self { k_min: 1000, c: 200.0 }
    }
}

impl StepPolicy {
    pub fn steps<T: Real>(&self, nu: T, t: T, j_plus_one: T) -> usize {
        let scaled = (self.c * (nu * t * j_plus_one).as_f64()).ceil();
        self.k_min.max(scaled as usize).max(2)
    }
}

/// Independent random stream for path `index` under a run `seed`.
///
/// ChaCha streams are counter based, so the variates of a path depend only
/// on `(seed, index)` and not on which worker draws them.
pub fn path_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Reusable Lévy (midpoint bisection) bridge builder.
///
/// Interior points are filled breadth-first: each bisection of `[lo, hi]`
/// draws two standard normals for the midpoint conditioned on the two
/// endpoints. With `K` a power of two, refining to `2K` at a fixed stream
/// reproduces the coarse points and only inserts new midpoints.
#[derive(Debug, Default)]
pub struct BridgeSampler<T> {
    variates: Vec<(T, T)>,
    /// Bisection order for the cached `(steps, t, ν)`.
    schedule: Vec<Split<T>>,
    key: Option<(usize, T, T)>,
}

/// Midpoint `mid` of `[lo, hi]`: conditional mean weight and standard
/// deviation.
#[derive(Clone, Copy, Debug)]
struct Split<T> {
    lo: usize,
    mid: usize,
    hi: usize,
    frac: T,
    sd: T,
}

impl<T: Real> BridgeSampler<T>
where
    StandardNormal: Distribution<T>,
{
    pub fn new() -> Self {
        Self { variates: Vec::new(), schedule: Vec::new(), key: None }
    }

    fn prepare(&mut self, cfg: &BridgeConfig<T>) {
        let key = (cfg.steps, cfg.t, cfg.nu);
        if self.key == Some(key) {
            return;
        }
        let k = cfg.steps;
        let time = |i: usize| cfg.t * T::from_usize_lossy(i) / T::from_usize_lossy(k);
        let two_nu = T::lit(2.0) * cfg.nu;
        self.schedule.clear();
        let mut queue = VecDeque::from([(0, k)]);
        while let Some((lo, hi)) = queue.pop_front() {
            if hi - lo < 2 {
                continue;
            }
            let mid = (lo + hi) / 2;
            let (s_lo, s_mid, s_hi) = (time(lo), time(mid), time(hi));
            let frac = (s_mid - s_lo) / (s_hi - s_lo);
            let sd = (two_nu * (s_mid - s_lo) * (s_hi - s_mid) / (s_hi - s_lo)).sqrt();
            self.schedule.push(Split { lo, mid, hi, frac, sd });
            queue.push_back((lo, mid));
            queue.push_back((mid, hi));
        }
        self.key = Some(key);
    }

    /// Draws the `K - 1` midpoint variate pairs for one path.
    pub fn draw_variates<R: Rng + ?Sized>(&mut self, steps: usize, rng: &mut R) {
        self.variates.clear();
        for _ in 0..steps.saturating_sub(1) {
            let a: T = StandardNormal.sample(rng);
            let b: T = StandardNormal.sample(rng);
            self.variates.push((a, b));
        }
    }

    /// Builds the path from the last drawn variates; `sign = -1` gives the
    /// reflection through the mean path, which has the same law.
    pub fn build_into(&mut self, cfg: &BridgeConfig<T>, sign: T, path: &mut PathSample<T>) {
        self.prepare(cfg);
        let k = cfg.steps;
        debug_assert_eq!(self.variates.len(), k - 1);
        path.times.clear();
        path.times.extend((0..=k).map(|i| cfg.t * T::from_usize_lossy(i) / T::from_usize_lossy(k)));
        path.points.clear();
        path.points.resize(k + 1, CoherentPoint::origin());
        path.points[0] = cfg.z;
        path.points[k] = cfg.zp;
        for (sp, &(x1, x2)) in self.schedule.iter().zip(&self.variates) {
            let a = path.points[sp.lo];
            let b = path.points[sp.hi];
            let sd = sp.sd * sign;
            path.points[sp.mid] = CoherentPoint::new(
                a.z1 + (b.z1 - a.z1) * sp.frac + sd * x1,
                a.z2 + (b.z2 - a.z2) * sp.frac + sd * x2,
            );
        }
    }

    pub fn sample<R: Rng + ?Sized>(&mut self, cfg: &BridgeConfig<T>, rng: &mut R) -> PathSample<T> {
        let mut path = PathSample { times: Vec::new(), points: Vec::new() };
        self.draw_variates(cfg.steps, rng);
        self.build_into(cfg, T::one(), &mut path);
        path
    }
}

/// Samples one discretized Brownian bridge with means
/// `z_k + (z'_k - z_k) s/t` and covariances `2ν δ_kl (min(r,s) - rs/t)`.
pub fn sample_bridge<T: Real, R: Rng + ?Sized>(cfg: &BridgeConfig<T>, rng: &mut R) -> PathSample<T>
where
    StandardNormal: Distribution<T>,
{
    BridgeSampler::new().sample(cfg, rng)
}

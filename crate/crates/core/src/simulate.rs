//! Seeded Monte Carlo estimation of expected efficiency and revenue.
//!
//! Trial `i` draws its values from ChaCha8 stream `i` of the run seed, so its
//! inputs do not depend on scheduling. Trials are grouped into fixed blocks
//! of [`BLOCK`]; per-block moments are merged in a fixed binary tree, which
//! makes every reported number independent of the worker count.
//!
//! Comparisons evaluate both mechanisms on the same draws (common random
//! numbers): the first `k` values are shared and the extra bidders only take
//! part in the second mechanism.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::auctions::{ema_totals, rma_totals};
use crate::distributions::{reserve_price, ValueDistribution};
use crate::{Error, Result, ALPHA};

/// Trials per reduction block.
pub const BLOCK: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_trials: u64,
    pub seed: u64,
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
}

impl SimConfig {
    pub fn new(n_trials: u64, seed: u64) -> Self {
        SimConfig { n_trials, seed, threads: None }
    }

    pub fn with_threads(mut self, threads: Option<usize>) -> Self {
        self.threads = threads;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MechanismKind {
    Ema,
    Rma,
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_err: f64,
    pub n: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MechanismEstimate {
    pub efficiency: Estimate,
    pub revenue: Estimate,
}

/// `diff_mean = eff_rma.mean - eff_ema.mean` on common draws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairedEstimate {
    pub diff_mean: f64,
    pub diff_std_err: f64,
    pub eff_ema: Estimate,
    pub eff_rma: Estimate,
}

/// `diff_mean = rev_ema.mean - rev_rma.mean`, EMA having one extra bidder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RevenueComparison {
    pub diff_mean: f64,
    pub diff_std_err: f64,
    pub rev_ema: Estimate,
    pub rev_rma: Estimate,
}

/// Ratio of means with a delta-method standard error and the lower bound it
/// is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ratio {
    pub value: f64,
    pub std_err: f64,
    pub bound: f64,
}

impl Ratio {
    /// `value >= bound - sigmas * std_err`.
    pub fn holds(&self, sigmas: f64) -> bool {
        self.value >= self.bound - sigmas * self.std_err
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub k: u32,
    /// `Eff(RMA(k)) / Eff(EMA(k))` against `1 - alpha^k`.
    pub efficiency: Ratio,
    /// `Rev(EMA(k)) / Rev(RMA(k))` against `1 - alpha^(k-1)`.
    pub revenue: Ratio,
}

/// Running means and co-moments of `N` jointly observed quantities.
#[derive(Debug, Clone, Copy)]
struct Moments<const N: usize> {
    n: u64,
    mean: [f64; N],
    comoment: [[f64; N]; N],
}

impl<const N: usize> Default for Moments<N> {
    fn default() -> Self {
        Moments { n: 0, mean: [0.0; N], comoment: [[0.0; N]; N] }
    }
}

#[allow(clippy::needless_range_loop)]
impl<const N: usize> Moments<N> {
    fn push(&mut self, x: [f64; N]) {
        self.n += 1;
        let n = self.n as f64;
        let mut before = [0.0; N];
        for i in 0..N {
            before[i] = x[i] - self.mean[i];
            self.mean[i] += before[i] / n;
        }
        for i in 0..N {
            for j in 0..N {
                self.comoment[i][j] += before[i] * (x[j] - self.mean[j]);
            }
        }
    }

    fn merge(a: &Self, b: &Self) -> Self {
        if a.n == 0 {
            return *b;
        }
        if b.n == 0 {
            return *a;
        }
        let n = a.n + b.n;
        let (na, nb, nf) = (a.n as f64, b.n as f64, n as f64);
        let mut out = Moments { n, ..Default::default() };
        let mut delta = [0.0; N];
        for i in 0..N {
            delta[i] = b.mean[i] - a.mean[i];
            out.mean[i] = a.mean[i] + delta[i] * nb / nf;
        }
        for i in 0..N {
            for j in 0..N {
                out.comoment[i][j] =
                    a.comoment[i][j] + b.comoment[i][j] + delta[i] * delta[j] * na * nb / nf;
            }
        }
        out
    }

    fn tree_merge(parts: &[Self]) -> Self {
        match parts.len() {
            0 => Self::default(),
            1 => parts[0],
            len => {
                let (l, r) = parts.split_at(len / 2);
                Self::merge(&Self::tree_merge(l), &Self::tree_merge(r))
            }
        }
    }

    fn covariance(&self, i: usize, j: usize) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.comoment[i][j] / (self.n - 1) as f64
        }
    }

    fn estimate(&self, i: usize, seed: u64) -> Estimate {
        Estimate {
            mean: self.mean[i],
            std_err: (self.covariance(i, i).max(0.0) / self.n as f64).sqrt(),
            n: self.n,
            seed,
        }
    }

    /// Mean and standard error of `x_i - x_j`.
    fn difference(&self, i: usize, j: usize) -> (f64, f64) {
        let var = self.covariance(i, i) + self.covariance(j, j) - 2.0 * self.covariance(i, j);
        (self.mean[i] - self.mean[j], (var.max(0.0) / self.n as f64).sqrt())
    }

    /// `mean_i / mean_j` with a delta-method standard error.
    fn ratio(&self, i: usize, j: usize) -> (f64, f64) {
        let (a, b) = (self.mean[i], self.mean[j]);
        if b == 0.0 {
            return (f64::NAN, f64::NAN);
        }
        let q = a / b;
        let var = self.covariance(i, i) - 2.0 * q * self.covariance(i, j)
            + q * q * self.covariance(j, j);
        (q, (var.max(0.0) / self.n as f64).sqrt() / b.abs())
    }
}

/// Runs `cfg.n_trials` trials of `draws` values each and accumulates the
/// `N` quantities returned by `trial`.
fn run_trials<const N: usize, D, F>(cfg: &SimConfig, dist: &D, draws: usize, trial: F) -> Result<Moments<N>>
where
    D: ValueDistribution + ?Sized,
    F: Fn(&[f64], &mut Vec<usize>) -> [f64; N] + Sync,
{
    if cfg.n_trials == 0 {
        return Err(Error::InvalidParameter("n_trials must be at least 1".into()));
    }
    let base = ChaCha8Rng::seed_from_u64(cfg.seed);
    let blocks = cfg.n_trials.div_ceil(BLOCK);
    let work = || -> Vec<Moments<N>> {
        (0..blocks)
            .into_par_iter()
            .map(|b| {
                let mut values = vec![0.0; draws];
                let mut scratch = Vec::with_capacity(draws);
                let mut acc = Moments::<N>::default();
                for index in b * BLOCK..((b + 1) * BLOCK).min(cfg.n_trials) {
                    let mut rng = base.clone();
                    rng.set_stream(index);
                    for v in values.iter_mut() {
                        *v = dist.quantile(rng.random::<f64>());
                    }
                    acc.push(trial(&values, &mut scratch));
                }
                acc
            })
            .collect()
    };
    let parts = match cfg.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::ThreadPool(e.to_string()))?
            .install(work),
        None => work(),
    };
    Ok(Moments::tree_merge(&parts))
}

fn positive(name: &str, v: u32) -> Result<()> {
    if v == 0 {
        Err(Error::InvalidParameter(format!("{name} must be at least 1")))
    } else {
        Ok(())
    }
}

/// Expected efficiency and revenue of one mechanism with `n_bidders` i.i.d.
/// bidders and `t` items.
pub fn estimate_mechanism<D: ValueDistribution + ?Sized>(
    dist: &D,
    n_bidders: u32,
    t: u32,
    mechanism: MechanismKind,
    cfg: &SimConfig,
) -> Result<MechanismEstimate> {
    positive("n_bidders", n_bidders)?;
    positive("t", t)?;
    let t = t as usize;
    let moments = match mechanism {
        MechanismKind::Ema => run_trials(cfg, dist, n_bidders as usize, |v, s| {
            let o = ema_totals(v, t, s);
            [o.efficiency, o.revenue]
        })?,
        MechanismKind::Rma => {
            let r = reserve_price(dist)?;
            run_trials(cfg, dist, n_bidders as usize, |v, s| {
                let o = rma_totals(v, t, r, s);
                [o.efficiency, o.revenue]
            })?
        }
    };
    Ok(MechanismEstimate { efficiency: moments.estimate(0, cfg.seed), revenue: moments.estimate(1, cfg.seed) })
}

/// Efficiency of RMA(k + extra) minus EMA(k) on shared draws, `t` items.
pub fn paired_compare<D: ValueDistribution + ?Sized>(
    dist: &D,
    k: u32,
    extra: u32,
    t: u32,
    cfg: &SimConfig,
) -> Result<PairedEstimate> {
    positive("k", k)?;
    positive("t", t)?;
    let r = reserve_price(dist)?;
    let (k, t) = (k as usize, t as usize);
    let m = run_trials(cfg, dist, k + extra as usize, |v, s| {
        let rma = rma_totals(v, t, r, s).efficiency;
        let ema = ema_totals(&v[..k], t, s).efficiency;
        [rma, ema]
    })?;
    let (diff_mean, diff_std_err) = m.difference(0, 1);
    Ok(PairedEstimate {
        diff_mean,
        diff_std_err,
        eff_ema: m.estimate(1, cfg.seed),
        eff_rma: m.estimate(0, cfg.seed),
    })
}

/// Revenue of EMA(k+1) minus RMA(k), single item, shared draws.
pub fn revenue_compare_bk<D: ValueDistribution + ?Sized>(
    dist: &D,
    k: u32,
    cfg: &SimConfig,
) -> Result<RevenueComparison> {
    positive("k", k)?;
    let r = reserve_price(dist)?;
    let k = k as usize;
    let m = run_trials(cfg, dist, k + 1, |v, s| {
        let ema = ema_totals(v, 1, s).revenue;
        let rma = rma_totals(&v[..k], 1, r, s).revenue;
        [ema, rma]
    })?;
    let (diff_mean, diff_std_err) = m.difference(0, 1);
    Ok(RevenueComparison {
        diff_mean,
        diff_std_err,
        rev_ema: m.estimate(0, cfg.seed),
        rev_rma: m.estimate(1, cfg.seed),
    })
}

/// Efficiency and revenue ratios of the two single-item mechanisms with the
/// same `k` bidders.
pub fn efficiency_ratio<D: ValueDistribution + ?Sized>(
    dist: &D,
    k: u32,
    cfg: &SimConfig,
) -> Result<RatioReport> {
    positive("k", k)?;
    let r = reserve_price(dist)?;
    let m = run_trials(cfg, dist, k as usize, |v, s| {
        let e = ema_totals(v, 1, s);
        let o = rma_totals(v, 1, r, s);
        [e.efficiency, o.efficiency, e.revenue, o.revenue]
    })?;
    let (eff, eff_se) = m.ratio(1, 0);
    let (rev, rev_se) = m.ratio(2, 3);
    Ok(RatioReport {
        k,
        efficiency: Ratio { value: eff, std_err: eff_se, bound: 1.0 - ALPHA.powi(k as i32) },
        revenue: Ratio { value: rev, std_err: rev_se, bound: 1.0 - ALPHA.powi(k as i32 - 1) },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{Exponential, GFamily, Uniform};

    fn unif() -> Uniform {
        Uniform::new(0.0, 1.0).unwrap()
    }

    #[test]
    fn moments_merge_matches_sequential() {
        let xs: Vec<[f64; 2]> = (0..1000).map(|i| {
            let x = (i as f64 * 0.37).sin();
            [x, x * x + 0.1 * i as f64]
        }).collect();
        let mut seq = Moments::<2>::default();
        xs.iter().for_each(|x| seq.push(*x));
        let parts: Vec<Moments<2>> = xs
            .chunks(77)
            .map(|c| {
                let mut m = Moments::default();
                c.iter().for_each(|x| m.push(*x));
                m
            })
            .collect();
        let merged = Moments::tree_merge(&parts);
        assert_eq!(merged.n, seq.n);
        for i in 0..2 {
            assert!((merged.mean[i] - seq.mean[i]).abs() < 1e-12);
            for j in 0..2 {
                assert!((merged.comoment[i][j] - seq.comoment[i][j]).abs() < 1e-8 * seq.comoment[i][j].abs().max(1.0));
            }
        }
    }

    #[test]
    fn expected_max_of_two_uniforms() {
        let cfg = SimConfig::new(200_000, 7);
        let est = estimate_mechanism(&unif(), 2, 1, MechanismKind::Ema, &cfg).unwrap();
        assert!((est.efficiency.mean - 2.0 / 3.0).abs() < 3.0 * est.efficiency.std_err);
        assert!((est.revenue.mean - 1.0 / 3.0).abs() < 4.0 * est.revenue.std_err);
        assert_eq!(est.efficiency.n, 200_000);
        assert_eq!(est.efficiency.seed, 7);
    }

    #[test]
    fn single_bidder_rma_exponential() {
        // efficiency = int_1^inf x e^{-x} dx = 2/e
        let e = Exponential::new(1.0).unwrap();
        let cfg = SimConfig::new(200_000, 3);
        let rma = estimate_mechanism(&e, 1, 1, MechanismKind::Rma, &cfg).unwrap();
        let ema = estimate_mechanism(&e, 1, 1, MechanismKind::Ema, &cfg).unwrap();
        let exact = 2.0 / std::f64::consts::E;
        assert!((rma.efficiency.mean - exact).abs() < 4.0 * rma.efficiency.std_err);
        assert!(rma.efficiency.mean <= ema.efficiency.mean);
        // revenue is r * (1 - F(r)) = 1/e
        assert!((rma.revenue.mean - 1.0 / std::f64::consts::E).abs() < 4.0 * rma.revenue.std_err);
    }

    #[test]
    fn deterministic_and_thread_independent() {
        let e = Exponential::new(1.0).unwrap();
        let a = paired_compare(&e, 3, 2, 1, &SimConfig::new(20_000, 11)).unwrap();
        let b = paired_compare(&e, 3, 2, 1, &SimConfig::new(20_000, 11).with_threads(Some(1))).unwrap();
        let c = paired_compare(&e, 3, 2, 1, &SimConfig::new(20_000, 11).with_threads(Some(3))).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
        let one = estimate_mechanism(&e, 2, 1, MechanismKind::Ema, &SimConfig::new(1, 5)).unwrap();
        let two = estimate_mechanism(&e, 2, 1, MechanismKind::Ema, &SimConfig::new(1, 5)).unwrap();
        assert_eq!(one, two);
        assert_eq!(one.efficiency.std_err, 0.0);
    }

    #[test]
    fn seed_changes_draws() {
        let a = estimate_mechanism(&unif(), 2, 1, MechanismKind::Ema, &SimConfig::new(1000, 1)).unwrap();
        let b = estimate_mechanism(&unif(), 2, 1, MechanismKind::Ema, &SimConfig::new(1000, 2)).unwrap();
        assert_ne!(a.efficiency.mean, b.efficiency.mean);
    }

    #[test]
    fn no_exclusion_means_no_difference() {
        // phi = 0: every value sits in the slab above the reserve
        let g = GFamily::new(0.0, 1.0, 1e-6).unwrap();
        let p = paired_compare(&g, 4, 0, 1, &SimConfig::new(10_000, 9)).unwrap();
        assert_eq!(p.diff_mean, 0.0);
        assert_eq!(p.diff_std_err, 0.0);
    }

    #[test]
    fn common_numbers_shrink_the_difference_error() {
        let e = Exponential::new(1.0).unwrap();
        let p = paired_compare(&e, 5, upper_bound(5), 1, &SimConfig::new(50_000, 2)).unwrap();
        assert!(p.diff_std_err <= p.eff_ema.std_err.max(p.eff_rma.std_err));
        assert!((p.diff_mean - (p.eff_rma.mean - p.eff_ema.mean)).abs() < 1e-12);
    }

    fn upper_bound(k: u32) -> u32 {
        crate::analysis::upper_bound_m(k)
    }

    #[test]
    fn bk_uniform_one_bidder() {
        let bk = revenue_compare_bk(&unif(), 1, &SimConfig::new(200_000, 4)).unwrap();
        assert!((bk.rev_ema.mean - 1.0 / 3.0).abs() < 4.0 * bk.rev_ema.std_err);
        assert!((bk.rev_rma.mean - 0.25).abs() < 4.0 * bk.rev_rma.std_err);
        assert!((bk.diff_mean - 1.0 / 12.0).abs() < 4.0 * bk.diff_std_err);
    }

    #[test]
    fn ratio_bounds() {
        let e = Exponential::new(1.0).unwrap();
        let rep = efficiency_ratio(&e, 1, &SimConfig::new(100_000, 8)).unwrap();
        assert!(rep.efficiency.holds(3.0));
        assert!((rep.efficiency.bound - (1.0 - ALPHA)).abs() < 1e-15);
        // one bidder pays nothing under VCG
        assert_eq!(rep.revenue.value, 0.0);
        assert_eq!(rep.revenue.bound, 0.0);
        let rep = efficiency_ratio(&e, 30, &SimConfig::new(20_000, 8)).unwrap();
        assert!(rep.efficiency.value > 0.999);
    }

    #[test]
    fn invalid_inputs() {
        let e = Exponential::new(1.0).unwrap();
        assert!(paired_compare(&e, 0, 1, 1, &SimConfig::new(10, 1)).is_err());
        assert!(paired_compare(&e, 1, 1, 0, &SimConfig::new(10, 1)).is_err());
        assert!(paired_compare(&e, 1, 1, 1, &SimConfig::new(0, 1)).is_err());
    }
}

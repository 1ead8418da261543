//! Monte Carlo comparison of the product-limit and reversed-hazard estimators
//! on log-normal lifetimes under left-censoring.
//!
//! Each replication draws `n` lifetimes `T ~ LogNormal(mu, sigma)`, censors
//! them (`X = max(T, C)`, detected iff `T >= C`), fits both estimators and
//! records the Kolmogorov-Smirnov distance of each to the true CDF over the
//! exact jump points. Fully censored replications are skipped and counted.

use rand::Rng;
use rand_chacha::rand_core::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::data::{Dataset, Observation};
use crate::error::{Result, SimError};
use crate::estimate::{product_limit_cdf, rhr_mle_cdf, StepCdf};
use crate::rng::{self, Purpose};

pub const DEFAULT_LODS: [f64; 3] = [0.5, 1.0, 2.0];
pub const DEFAULT_N: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "kebab-case")]
pub enum Scheme {
    /// Each unit's limit of detection is drawn uniformly from `lods`.
    Time { lods: Vec<f64> },
    /// Censoring values are `LogNormal(mu_c, sigma_c)`, independent of `T`.
    Random { mu_c: f64, sigma_c: f64 },
}

impl Scheme {
    pub fn time_default() -> Self {
        Scheme::Time { lods: DEFAULT_LODS.to_vec() }
    }

    pub fn random_default() -> Self {
        Scheme::Random { mu_c: 0.0, sigma_c: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub mu: f64,
    pub sigma: f64,
    #[serde(flatten)]
    pub scheme: Scheme,
    pub n: usize,
    pub m: usize,
    pub seed: u64,
}

impl SimConfig {
    pub fn new(mu: f64, sigma: f64, scheme: Scheme, m: usize, seed: u64) -> Self {
        Self { mu, sigma, scheme, n: DEFAULT_N, m, seed }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(SimError::InvalidConfig(msg).into());
        if !self.mu.is_finite() {
            return bad(format!("mu must be finite, got {}", self.mu));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return bad(format!("sigma must be positive, got {}", self.sigma));
        }
        if self.n < 2 {
            return bad(format!("n must be at least 2, got {}", self.n));
        }
        if self.m < 1 || self.m as u64 >= rng::MAX_REPLICATIONS {
            return bad(format!("m must be in [1, 2^47), got {}", self.m));
        }
        match &self.scheme {
            Scheme::Time { lods } => {
                if lods.is_empty() {
                    return bad("lods must be non-empty".into());
                }
                if let Some(l) = lods.iter().find(|l| !(**l > 0.0 && l.is_finite())) {
                    return bad(format!("lods must be positive, got {l}"));
                }
            }
            Scheme::Random { mu_c, sigma_c } => {
                if !mu_c.is_finite() {
                    return bad(format!("mu_c must be finite, got {mu_c}"));
                }
                if !(*sigma_c > 0.0 && sigma_c.is_finite()) {
                    return bad(format!("sigma_c must be positive, got {sigma_c}"));
                }
            }
        }
        Ok(())
    }
}

pub fn sample_lognormal<R: RngCore + ?Sized>(mu: f64, sigma: f64, n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| (mu + sigma * rng::standard_normal(rng)).exp()).collect()
}

/// Left-censors a lifetime at `c`.
pub fn censor(t: f64, c: f64) -> Observation {
    Observation { value: t.max(c), detected: t >= c }
}

pub fn apply_time_censoring<R: RngCore + ?Sized>(lifetimes: &[f64], lods: &[f64], rng: &mut R) -> Vec<Observation> {
    lifetimes
        .iter()
        .map(|&t| censor(t, lods[rng.random_range(0..lods.len() as u64) as usize]))
        .collect()
}

pub fn apply_random_censoring<R: RngCore + ?Sized>(
    lifetimes: &[f64],
    mu_c: f64,
    sigma_c: f64,
    rng: &mut R,
) -> Vec<Observation> {
    let c = sample_lognormal(mu_c, sigma_c, lifetimes.len(), rng);
    lifetimes.iter().zip(c).map(|(&t, c)| censor(t, c)).collect()
}

pub fn lognormal_cdf(t: f64, mu: f64, sigma: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    Normal::standard().cdf((t.ln() - mu) / sigma)
}

/// Largest gap between `f` and the log-normal CDF over the jump points of `f`.
pub fn ks_distance(f: &StepCdf, mu: f64, sigma: f64) -> f64 {
    f.jumps()
        .iter()
        .map(|j| (lognormal_cdf(j.t, mu, sigma) - j.estimate).abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplicationPair {
    pub replication: u64,
    /// Distance of the product-limit estimate.
    pub d_ks: f64,
    /// Distance of the reversed-hazard estimate.
    pub d_ks_1: f64,
}

impl ReplicationPair {
    pub fn diff(&self) -> f64 {
        self.d_ks - self.d_ks_1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyResult {
    pub pairs: Vec<ReplicationPair>,
    /// Mean of `d_ks - d_ks_1` over non-degenerate replications.
    pub mean_diff: f64,
    pub n_degenerate: usize,
}

impl StudyResult {
    pub fn n_pairs(&self) -> usize {
        self.pairs.len()
    }

    /// Standard error of `mean_diff`; 0 with fewer than two pairs.
    pub fn std_error(&self) -> f64 {
        let k = self.pairs.len();
        if k < 2 {
            return 0.0;
        }
        let ss: f64 = self.pairs.iter().map(|p| (p.diff() - self.mean_diff).powi(2)).sum();
        (ss / (k - 1) as f64 / k as f64).sqrt()
    }
}

/// Runs one replication; `None` when every observation is censored.
pub fn replicate(cfg: &SimConfig, block: u64, replication: u64) -> Option<ReplicationPair> {
    let mut t_rng = rng::stream(cfg.seed, block, replication, Purpose::Lifetimes);
    let mut c_rng = rng::stream(cfg.seed, block, replication, Purpose::Censoring);
    let lifetimes = sample_lognormal(cfg.mu, cfg.sigma, cfg.n, &mut t_rng);
    let observations = match &cfg.scheme {
        Scheme::Time { lods } => apply_time_censoring(&lifetimes, lods, &mut c_rng),
        Scheme::Random { mu_c, sigma_c } => apply_random_censoring(&lifetimes, *mu_c, *sigma_c, &mut c_rng),
    };
    let table = Dataset::new(observations).ok()?.tally();
    let pl = product_limit_cdf(&table).ok()?;
    let rhr = rhr_mle_cdf(&table).ok()?;
    Some(ReplicationPair {
        replication,
        d_ks: ks_distance(&pl, cfg.mu, cfg.sigma),
        d_ks_1: ks_distance(&rhr, cfg.mu, cfg.sigma),
    })
}

fn run_block(cfg: &SimConfig, block: u64) -> Result<StudyResult> {
    cfg.validate()?;
    let outcomes: Vec<Option<ReplicationPair>> = (0..cfg.m as u64)
        .into_par_iter()
        .map(|r| replicate(cfg, block, r))
        .collect();
    let n_degenerate = outcomes.iter().filter(|o| o.is_none()).count();
    let pairs: Vec<ReplicationPair> = outcomes.into_iter().flatten().collect();
    if pairs.is_empty() {
        return Err(SimError::AllDegenerate(cfg.m).into());
    }
    let mean_diff = pairs.iter().map(ReplicationPair::diff).sum::<f64>() / pairs.len() as f64;
    Ok(StudyResult { pairs, mean_diff, n_degenerate })
}

/// Runs the study on the current rayon pool. The result is identical for any
/// number of workers.
pub fn run_study(cfg: &SimConfig) -> Result<StudyResult> {
    run_block(cfg, 0)
}

/// Runs the study on a dedicated pool of `workers` threads.
pub fn run_study_with_workers(cfg: &SimConfig, workers: usize) -> Result<StudyResult> {
    with_pool(workers, || run_study(cfg))
}

fn with_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .expect("thread pool")
        .install(f)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepParam {
    Mu,
    Sigma,
}

impl SweepParam {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepParam::Mu => "mu",
            SweepParam::Sigma => "sigma",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub param: f64,
    pub result: StudyResult,
}

/// `count` evenly spaced values from `start` to `end` inclusive.
pub fn linspace(start: f64, end: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..count)
            .map(|i| start + (end - start) * i as f64 / (count - 1) as f64)
            .collect(),
    }
}

/// One study per grid value, in increasing parameter order. Grid point `i`
/// (after sorting) draws from stream block `i`, so a one-point sweep equals
/// `run_study` at that point.
pub fn sweep(base: &SimConfig, param: SweepParam, grid: &[f64]) -> Result<Vec<SweepPoint>> {
    if grid.is_empty() {
        return Err(SimError::EmptyGrid.into());
    }
    if grid.len() as u64 > rng::MAX_BLOCKS {
        return Err(SimError::InvalidConfig(format!("grid has more than {} points", rng::MAX_BLOCKS)).into());
    }
    let mut values = grid.to_vec();
    values.sort_by(f64::total_cmp);
    let configs: Vec<SimConfig> = values
        .iter()
        .map(|&v| {
            let mut cfg = base.clone();
            match param {
                SweepParam::Mu => cfg.mu = v,
                SweepParam::Sigma => cfg.sigma = v,
            }
            cfg
        })
        .collect();
    for cfg in &configs {
        cfg.validate()?;
    }
    configs
        .iter()
        .zip(&values)
        .enumerate()
        .map(|(block, (cfg, &param))| Ok(SweepPoint { param, result: run_block(cfg, block as u64)? }))
        .collect()
}

pub fn sweep_with_workers(base: &SimConfig, param: SweepParam, grid: &[f64], workers: usize) -> Result<Vec<SweepPoint>> {
    with_pool(workers, || sweep(base, param, grid))
}

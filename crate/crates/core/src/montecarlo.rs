//! Seeded sample-path estimates of local-time averages.
//!
//! Trial `i` draws from its own ChaCha8 stream `(seed, i)`, and the per-trial
//! values are reduced by pairwise summation in trial order, so the result does
//! not depend on how many threads ran the trials.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::exact::LocalTimeProfile;
use crate::graph::{Endpoint, EnsembleSpec, TransitionMatrix};
use crate::{Error, Result};

/// Environment variable capping the number of simulation threads.
pub const THREADS_ENV: &str = "LOCALTIME_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SimulationConfig {
    pub seed: u64,
    pub trials: u64,
    pub spec: EnsembleSpec,
}

impl SimulationConfig {
    pub fn new(seed: u64, trials: u64, spec: EnsembleSpec) -> Result<Self> {
        if trials == 0 {
            return Err(Error::InvalidArgument("trials must be at least 1".into()));
        }
        Ok(Self { seed, trials, spec })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimateWithError {
    pub mean: f64,
    /// Sample standard deviation over `sqrt(trials_used)`.
    pub standard_error: f64,
    pub trials_used: u64,
}

/// Path functional whose ensemble average is estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Functional {
    Mean { v1: usize },
    Product { v1: usize, v2: usize },
    Indicator { v: usize, l: usize },
    ZeroVisit { v: usize },
}

impl Functional {
    fn vertices(&self) -> Vec<usize> {
        match *self {
            Functional::Mean { v1 } => vec![v1],
            Functional::Product { v1, v2 } => vec![v1, v2],
            Functional::Indicator { v, .. } | Functional::ZeroVisit { v } => vec![v],
        }
    }

    fn evaluate(&self, path: &[usize]) -> f64 {
        match *self {
            Functional::Mean { v1 } => local_time_of_path(path, v1) as f64,
            Functional::Product { v1, v2 } => {
                (local_time_of_path(path, v1) * local_time_of_path(path, v2)) as f64
            }
            Functional::Indicator { v, l } => f64::from(u8::from(local_time_of_path(path, v) == l)),
            Functional::ZeroVisit { v } => f64::from(u8::from(local_time_of_path(path, v) == 0)),
        }
    }
}

/// Inverse-CDF sampler over the rows of a transition matrix.
#[derive(Debug, Clone)]
pub struct Sampler {
    cdf: Vec<Vec<f64>>,
    /// Last column with positive probability in each row.
    last: Vec<usize>,
}

impl Sampler {
    pub fn new(p: &TransitionMatrix) -> Self {
        let n = p.size();
        let mut cdf = Vec::with_capacity(n);
        let mut last = Vec::with_capacity(n);
        for i in 0..n {
            let mut acc = 0.0;
            let row: Vec<f64> = (0..n)
                .map(|j| {
                    acc += p.get(i, j);
                    acc
                })
                .collect();
            last.push((0..n).rev().find(|&j| p.get(i, j) > 0.0).unwrap_or(n - 1));
            cdf.push(row);
        }
        Self { cdf, last }
    }

    pub fn size(&self) -> usize {
        self.cdf.len()
    }

    /// Next vertex after `from`, given a uniform draw `u` in `[0, 1)`.
    pub fn next(&self, from: usize, u: f64) -> usize {
        let row = &self.cdf[from];
        // first j with u < cdf[j]; rounding in the row sum can leave u past the end
        row.partition_point(|&c| c <= u).min(self.last[from])
    }

    pub fn sample_path<R: Rng + ?Sized>(&self, va: usize, n: usize, rng: &mut R) -> Vec<usize> {
        let mut path = Vec::with_capacity(n + 1);
        path.push(va);
        let mut v = va;
        for _ in 0..n {
            v = self.next(v, rng.random::<f64>());
            path.push(v);
        }
        path
    }
}

/// Path `(va, v1, ..., vn)` drawn from `P`.
pub fn sample_path<R: Rng + ?Sized>(p: &TransitionMatrix, va: usize, n: usize, rng: &mut R) -> Result<Vec<usize>> {
    p.check_vertex(va)?;
    Ok(Sampler::new(p).sample_path(va, n, rng))
}

/// Visits to `v` at steps `1..=n`.
pub fn local_time_of_path(path: &[usize], v: usize) -> usize {
    path.iter().skip(1).filter(|&&x| x == v).count()
}

/// Profile of a sampled path.
pub fn profile_of_path(path: &[usize], size: usize) -> LocalTimeProfile {
    LocalTimeProfile::from_path(path, size)
}

/// Random stream of trial `trial` under `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Free endpoint: plain mean of the functional. Fixed endpoint: mean over the
/// paths that end at `vb`, i.e. an estimate of `<f> / <1>`.
pub fn estimate(p: &TransitionMatrix, config: &SimulationConfig, functional: Functional) -> Result<EstimateWithError> {
    if config.trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    config.spec.check(p)?;
    for v in functional.vertices() {
        p.check_vertex(v)?;
    }
    let sampler = Sampler::new(p);
    let spec = config.spec;
    let run = |i: u64| -> Option<f64> {
        let mut rng = trial_rng(config.seed, i);
        let path = sampler.sample_path(spec.start, spec.horizon, &mut rng);
        match spec.endpoint {
            Endpoint::Fixed(vb) if path[spec.horizon] != vb => None,
            _ => Some(functional.evaluate(&path)),
        }
    };
    let samples: Vec<Option<f64>> = with_pool(|| (0..config.trials).into_par_iter().map(run).collect())?;
    let accepted: Vec<f64> = samples.into_iter().flatten().collect();
    summarize(&accepted)
}

/// Mean and standard error of `values` with pairwise summation.
pub fn summarize(values: &[f64]) -> Result<EstimateWithError> {
    if values.is_empty() {
        return Err(Error::NoAcceptedPaths);
    }
    let n = values.len() as f64;
    let mean = pairwise_sum(values) / n;
    let standard_error = if values.len() > 1 {
        let dev: Vec<f64> = values.iter().map(|x| (x - mean) * (x - mean)).collect();
        (pairwise_sum(&dev) / (n - 1.0)).sqrt() / n.sqrt()
    } else {
        0.0
    };
    Ok(EstimateWithError { mean, standard_error, trials_used: values.len() as u64 })
}

fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// Thread cap from `LOCALTIME_THREADS`, if set to a positive integer.
pub fn thread_limit() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|&t| t > 0)
}

fn with_pool<T: Send>(job: impl FnOnce() -> T + Send) -> Result<T> {
    match thread_limit() {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
            Ok(pool.install(job))
        }
        None => Ok(job()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_cycle() -> TransitionMatrix {
        TransitionMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap()
    }

    #[test]
    fn deterministic_paths() {
        let mut rng = trial_rng(1, 0);
        assert_eq!(sample_path(&two_cycle(), 0, 3, &mut rng).unwrap(), vec![0, 1, 0, 1]);
        let loop1 = TransitionMatrix::from_rows(&[vec![1.0]]).unwrap();
        assert_eq!(sample_path(&loop1, 0, 4, &mut rng).unwrap(), vec![0; 5]);
    }

    #[test]
    fn local_time_skips_start() {
        assert_eq!(local_time_of_path(&[0, 1, 0, 1], 0), 1);
        assert_eq!(local_time_of_path(&[0, 1, 0, 1], 1), 2);
        assert_eq!(profile_of_path(&[0, 1, 0, 1], 2).counts, vec![1, 2]);
    }

    #[test]
    fn two_cycle_mean_is_exact() {
        let cfg = SimulationConfig::new(7, 1000, EnsembleSpec::free(0, 4)).unwrap();
        let e = estimate(&two_cycle(), &cfg, Functional::Mean { v1: 1 }).unwrap();
        assert_eq!(e.mean, 2.0);
        assert_eq!(e.standard_error, 0.0);
        assert_eq!(e.trials_used, 1000);
    }

    #[test]
    fn unreachable_endpoint_rejects_everything() {
        let cfg = SimulationConfig::new(7, 50, EnsembleSpec::fixed(0, 1, 4)).unwrap();
        let e = estimate(&two_cycle(), &cfg, Functional::Mean { v1: 1 });
        assert_eq!(e.unwrap_err(), Error::NoAcceptedPaths);
    }

    #[test]
    fn sampler_ignores_trailing_zero_columns() {
        let p = TransitionMatrix::from_rows(&[vec![1.0, 0.0], vec![0.5, 0.5]]).unwrap();
        let s = Sampler::new(&p);
        assert_eq!(s.next(0, 0.999_999_999_999), 0);
        assert_eq!(s.next(1, 0.25), 0);
        assert_eq!(s.next(1, 0.75), 1);
    }

    #[test]
    fn zero_trials_rejected() {
        assert!(SimulationConfig::new(1, 0, EnsembleSpec::free(0, 1)).is_err());
    }

    #[test]
    fn summary_statistics() {
        let e = summarize(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(e.mean, 2.5);
        assert!((e.standard_error - (5.0f64 / 3.0).sqrt() / 2.0).abs() < 1e-15);
    }
}

//! Monte Carlo settings and the deterministic parallel counting loop.

use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::kernels::RngStream;

/// Default number of inner Monte Carlo iterations.
pub const DEFAULT_MC_ITER: usize = 5000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McSettings {
    /// Inner iterations `J`.
    pub mc_iter: usize,
    /// Outer datasets `R` (unknown-variance simulation only).
    pub datasets: usize,
    pub seed: u64,
    /// Worker threads; `None` uses the global rayon pool.
    pub workers: Option<usize>,
}

impl Default for McSettings {
    fn default() -> Self {
        Self {
            mc_iter: DEFAULT_MC_ITER,
            datasets: 100,
            seed: 1,
            workers: None,
        }
    }
}

impl McSettings {
    pub fn new(mc_iter: usize, seed: u64) -> Self {
        Self {
            mc_iter,
            seed,
            ..Self::default()
        }
    }

    pub fn with_datasets(mut self, datasets: usize) -> Self {
        self.datasets = datasets;
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = Some(workers);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.mc_iter == 0 {
            return Err(domain("mc_iter must be at least 1"));
        }
        if self.datasets == 0 {
            return Err(domain("the number of datasets R must be at least 1"));
        }
        if self.workers == Some(0) {
            return Err(domain("workers must be at least 1"));
        }
        Ok(())
    }

    /// Root stream for one simulation family; `tag` keeps families apart.
    pub(crate) fn root(&self, tag: u64) -> RngStream {
        RngStream::new(self.seed, tag)
    }

    /// Runs `f` inside a pool of `workers` threads, or the global pool.
    pub(crate) fn install<T: Send>(&self, f: impl FnOnce() -> T + Send) -> T {
        match self.workers {
            Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
                Ok(pool) => pool.install(f),
                Err(_) => f(),
            },
            None => f(),
        }
    }
}

/// Counts successes of `trial` over `count` iterations, each seeded from its own
/// child stream of `task`. Integer accumulation keeps the result independent of
/// how rayon splits the work.
pub(crate) fn count_successes<F>(task: RngStream, count: usize, trial: F) -> Result<u64>
where
    F: Fn(RngStream) -> Result<bool> + Sync,
{
    (0..count as u64)
        .into_par_iter()
        .map(|j| trial(task.child(j)).map(u64::from))
        .try_reduce(|| 0, |a, b| Ok(a + b))
}

/// Binomial standard error of a Monte Carlo proportion.
pub fn mc_standard_error(estimate: f64, iterations: usize) -> f64 {
    (estimate * (1.0 - estimate) / iterations as f64).sqrt()
}

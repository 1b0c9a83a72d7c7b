//! Deterministic parallel repetition runner and reductions.

use anyhow::{Context, Result};
use rayon::prelude::*;

/// Builds a rayon pool with `threads` workers (0 picks the rayon default).
pub fn make_pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .context("building worker pool")
}

/// Runs `f(rep)` for every repetition index and returns the results in
/// repetition order, independent of scheduling.
pub fn run_indexed<T, F>(pool: &rayon::ThreadPool, reps: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync,
{
    pool.install(|| (0..reps).into_par_iter().map(&f).collect())
}

/// Pairwise summation over a fixed-order slice; the reduction tree depends
/// only on the length, so totals do not change with thread count.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1..=8 => xs.iter().sum(),
        n => {
            let (a, b) = xs.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

/// Mean and Monte Carlo standard error of the mean.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = pairwise_sum(xs) / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let sq: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&sq) / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Sample variance (unbiased) via the same deterministic reduction.
pub fn sample_variance(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = pairwise_sum(xs) / n;
    let sq: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    pairwise_sum(&sq) / (n - 1.0)
}

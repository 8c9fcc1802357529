//! Seeded replica running and binomial interval estimation.

use crate::randomness::replica_seed;
use statrs::distribution::{Beta, ContinuousCDF};

/// Two-sided 97.5% normal quantile, for 95% Wilson score intervals.
pub const WILSON_Z95: f64 = 1.959963984540054;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CiMethod {
    /// Wilson score interval; good coverage even at extreme proportions.
    #[default]
    Wilson,
    /// Clopper-Pearson exact interval; conservative by construction.
    ClopperPearson,
}

/// A Monte Carlo proportion with its 95% confidence interval and provenance.
#[derive(Clone, Debug, PartialEq)]
pub struct Estimate {
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n_runs: u64,
    pub n_success: u64,
    /// Base seed the replica seeds were derived from.
    pub seed: u64,
}

impl Estimate {
    pub fn from_counts(n_success: u64, n_runs: u64, seed: u64, method: CiMethod) -> Estimate {
        assert!(n_runs > 0, "an estimate needs at least one run");
        assert!(n_success <= n_runs);
        let p_hat = n_success as f64 / n_runs as f64;
        let (ci_low, ci_high) = match method {
            CiMethod::Wilson => wilson_interval(n_success, n_runs),
            CiMethod::ClopperPearson => clopper_pearson_interval(n_success, n_runs),
        };
        Estimate {
            p_hat,
            ci_low,
            ci_high,
            n_runs,
            n_success,
            seed,
        }
    }

    pub fn ci_width(&self) -> f64 {
        self.ci_high - self.ci_low
    }
}

fn wilson_interval(s: u64, n: u64) -> (f64, f64) {
    // The boundary endpoints are 0 and 1 algebraically; evaluating the
    // formula there leaves 1-ulp residue, so they are pinned instead.
    let nf = n as f64;
    let p = s as f64 / nf;
    let z2 = WILSON_Z95 * WILSON_Z95;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = WILSON_Z95 * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    let low = if s == 0 { 0.0 } else { (center - half).max(0.0) };
    let high = if s == n { 1.0 } else { (center + half).min(1.0) };
    (low, high)
}

fn clopper_pearson_interval(s: u64, n: u64) -> (f64, f64) {
    let alpha = 0.05;
    let low = if s == 0 {
        0.0
    } else {
        Beta::new(s as f64, (n - s) as f64 + 1.0)
            .expect("valid shape parameters")
            .inverse_cdf(alpha / 2.0)
    };
    let high = if s == n {
        1.0
    } else {
        Beta::new(s as f64 + 1.0, (n - s) as f64)
            .expect("valid shape parameters")
            .inverse_cdf(1.0 - alpha / 2.0)
    };
    (low, high)
}

/// Runs `n_runs` seeded jobs and collects the results in replica order.
///
/// `job` receives `(replica index, replica seed)`. `threads` selects the
/// execution mode: 1 runs inline, 0 uses all cores, any other count uses a
/// dedicated pool of that size. The output is identical in every mode.
pub fn run_replicas<T, F>(n_runs: u64, base_seed: u64, threads: usize, job: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, u64) -> T + Sync,
{
    let sequential = |job: &F| {
        (0..n_runs)
            .map(|i| job(i, replica_seed(base_seed, i as usize)))
            .collect::<Vec<T>>()
    };

    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        let parallel = |job: &F| {
            (0..n_runs)
                .into_par_iter()
                .map(|i| job(i, replica_seed(base_seed, i as usize)))
                .collect::<Vec<T>>()
        };
        match threads {
            1 => sequential(&job),
            0 => parallel(&job),
            k => rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .expect("thread pool construction")
                .install(|| parallel(&job)),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        sequential(&job)
    }
}

/// Estimates P(trial succeeds) with a Wilson 95% interval.
///
/// Trials receive seeds derived from `(base_seed, replica index)`, so the
/// estimate is reproducible and independent of the parallelism degree.
pub fn estimate_event<F>(trial: F, n_runs: u64, base_seed: u64, threads: usize) -> Estimate
where
    F: Fn(u64) -> bool + Sync,
{
    estimate_event_with(trial, n_runs, base_seed, threads, CiMethod::Wilson)
}

pub fn estimate_event_with<F>(
    trial: F,
    n_runs: u64,
    base_seed: u64,
    threads: usize,
    method: CiMethod,
) -> Estimate
where
    F: Fn(u64) -> bool + Sync,
{
    assert!(n_runs >= 100, "below 100 runs the interval is meaningless");
    let successes: u64 = run_replicas(n_runs, base_seed, threads, |_, seed| trial(seed))
        .into_iter()
        .map(u64::from)
        .sum();
    Estimate::from_counts(successes, n_runs, base_seed, method)
}

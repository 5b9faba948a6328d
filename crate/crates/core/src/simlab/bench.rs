//! Wall-clock comparison of the two pseudo-value generators.

use super::generate::{simulate_competing, simulate_trial};
use super::opchar::DEFAULT_LAMBDA_D;
use super::scenario::{EffectCase, ScenarioConfig};
use crate::error::{Error, Result};
use crate::pseudo::{if_pseudo, jackknife_pseudo, EstimandKind, Scale};
use std::hint::black_box;
use std::time::{Duration, Instant};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchRow {
    /// Total sample size.
    pub n: usize,
    pub jackknife: Duration,
    pub influence: Duration,
}

impl BenchRow {
    pub fn ratio(&self) -> f64 {
        self.jackknife.as_secs_f64() / self.influence.as_secs_f64().max(1e-12)
    }
}

fn median(mut xs: Vec<Duration>) -> Duration {
    xs.sort();
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[m]
    } else {
        (xs[m - 1] + xs[m]) / 2
    }
}

fn time_median<T>(reps: usize, mut f: impl FnMut() -> Result<T>) -> Result<Duration> {
    let mut times = Vec::with_capacity(reps);
    for _ in 0..reps {
        let start = Instant::now();
        black_box(f()?);
        times.push(start.elapsed());
    }
    Ok(median(times))
}

/// Median single-threaded runtime of each generator on a both-effects
/// dataset of total size `n` (split evenly between arms), per size.
pub fn bench_pseudo(sizes: &[usize], reps: usize, scale: Scale, tau: f64, seed: u64) -> Result<Vec<BenchRow>> {
    if reps == 0 {
        return Err(Error::InvalidArgument("bench needs at least one repetition".into()));
    }
    let estimand = EstimandKind::new(scale, tau)?;
    sizes
        .iter()
        .map(|&n| {
            if n < 4 {
                return Err(Error::InvalidArgument(format!("bench size {n} is below 4")));
            }
            let config = ScenarioConfig::new(n / 2, EffectCase::Both, tau).with_seed(seed);
            let sample = match scale {
                Scale::CumulativeIncidence(_) => simulate_competing(&config.with_competing(DEFAULT_LAMBDA_D))?,
                _ => simulate_trial(&config)?,
            };
            // Warm-up so the first timed call does not pay for page faults.
            if_pseudo(&sample, &estimand)?;
            jackknife_pseudo(&sample, &estimand)?;
            Ok(BenchRow {
                n: sample.len(),
                jackknife: time_median(reps, || jackknife_pseudo(&sample, &estimand))?,
                influence: time_median(reps, || if_pseudo(&sample, &estimand))?,
            })
        })
        .collect()
}

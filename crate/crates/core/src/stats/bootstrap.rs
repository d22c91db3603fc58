//! Percentile bootstrap for the mean.
//!
//! Each resample draws its own RNG stream from (seed, resample index), so
//! results are identical for a fixed seed no matter how many worker threads
//! run the resampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::StatsError;

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct BootstrapSummary {
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub resamples: usize,
    pub confidence: f64,
    pub seed: u64,
}

/// Percentile confidence interval for the mean with `resamples` draws.
pub fn bootstrap_mean_ci(
    values: &[f64],
    resamples: usize,
    confidence: f64,
    seed: u64,
) -> Result<BootstrapSummary, StatsError> {
    if values.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    assert!(
        confidence > 0.0 && confidence < 1.0,
        "confidence must be in (0,1)"
    );
    assert!(resamples >= 2, "need at least 2 resamples");
    let n = values.len();
    let mut means: Vec<f64> = (0..resamples)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let sum: f64 = (0..n).map(|_| values[rng.gen_range(0..n)]).sum();
            sum / n as f64
        })
        .collect();
    means.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let alpha = 1.0 - confidence;
    Ok(BootstrapSummary {
        mean: values.iter().sum::<f64>() / n as f64,
        ci_low: quantile_sorted(&means, alpha / 2.0),
        ci_high: quantile_sorted(&means, 1.0 - alpha / 2.0),
        resamples,
        confidence,
        seed,
    })
}

/// Linear-interpolation quantile of an ascending-sorted slice.
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    let pos = q * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        let frac = pos - lo as f64;
        sorted[lo] * (1.0 - frac) + sorted[hi] * frac
    }
}

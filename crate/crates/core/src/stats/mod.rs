//! Divergence statistics between personal and global rankings.

mod bootstrap;
pub mod dist;
mod rank;
mod wilcoxon;

pub use bootstrap::{bootstrap_mean_ci, BootstrapSummary};
pub use rank::{average_ranks, spearman_p_value, spearman_rho};
pub use wilcoxon::{wilcoxon_signed_rank, WilcoxonMethod, WilcoxonMode, WilcoxonResult};

use crate::rating::RatingSystem;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum StatsError {
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("too few items: {0}")]
    TooFewItems(usize),
    #[error("rank vector has zero variance")]
    ZeroVariance,
    #[error("input contains non-finite values")]
    NonFiniteInput,
    #[error("all differences are zero")]
    AllZeroDifferences,
    #[error("empty input")]
    EmptyInput,
    #[error("records mix rating systems")]
    MixedSystems,
}

/// One user's divergence from the global ranking under one rating system.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CorrelationRecord {
    pub user_id: String,
    pub system: RatingSystem,
    pub rho: f64,
    pub p_value: f64,
    pub n_models: usize,
}

/// Population summary of correlation records for a single system.
///
/// `sd` is the sample standard deviation (n-1); undefined for n = 1. The
/// threshold fractions use the fixed cutpoints 0.1 and 0.5 on rho and 0.05
/// on the p-value.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct PopulationSummary {
    pub system: RatingSystem,
    pub n: usize,
    pub mean: f64,
    pub sd: Option<f64>,
    pub median: f64,
    pub min: f64,
    pub max: f64,
    pub frac_below_0_1: f64,
    pub frac_below_0_5: f64,
    pub frac_significant_0_05: f64,
}

/// Summarize a nonempty single-system list of correlation records.
pub fn summarize_population(
    records: &[CorrelationRecord],
) -> Result<PopulationSummary, StatsError> {
    if records.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    let system = records[0].system;
    if records.iter().any(|r| r.system != system) {
        return Err(StatsError::MixedSystems);
    }
    let n = records.len();
    let rhos: Vec<f64> = records.iter().map(|r| r.rho).collect();
    let mean = rhos.iter().sum::<f64>() / n as f64;
    let sd = if n > 1 {
        let var = rhos.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        Some(var.sqrt())
    } else {
        None
    };
    let mut sorted = rhos.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    };
    let frac = |pred: &dyn Fn(&CorrelationRecord) -> bool| {
        records.iter().filter(|r| pred(r)).count() as f64 / n as f64
    };
    Ok(PopulationSummary {
        system,
        n,
        mean,
        sd,
        median,
        min: sorted[0],
        max: sorted[n - 1],
        frac_below_0_1: frac(&|r| r.rho < 0.1),
        frac_below_0_5: frac(&|r| r.rho < 0.5),
        frac_significant_0_05: frac(&|r| r.p_value < 0.05),
    })
}

/// One-sample t test of the mean against `mu0`, two-sided. Provided next to
/// the Wilcoxon test so population reports can list both.
pub fn t_test_one_sample_p(values: &[f64], mu0: f64) -> Result<f64, StatsError> {
    if values.len() < 2 {
        return Err(StatsError::TooFewItems(values.len()));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    if var == 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    let t = (mean - mu0) / (var / n).sqrt();
    Ok(dist::student_t_two_sided_p(t, n - 1.0))
}

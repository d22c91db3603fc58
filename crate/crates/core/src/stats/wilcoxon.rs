//! Wilcoxon signed-rank test, one-sample or paired, two-sided.
//!
//! W is the sum of ranks of positive differences with average ranks for tied
//! magnitudes and zero differences dropped. The null distribution is
//! enumerated exactly over all 2^n sign assignments up to n = 12; beyond
//! that, the normal approximation with tie-corrected variance and continuity
//! correction.

use super::dist::normal_two_sided_p;
use super::rank::average_ranks;
use super::StatsError;

/// Test mode: a single sample against a location `mu0`, or paired samples.
#[derive(Debug, Clone, PartialEq)]
pub enum WilcoxonMode<'a> {
    OneSample(f64),
    Paired(&'a [f64]),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WilcoxonMethod {
    Exact,
    NormalApprox,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct WilcoxonResult {
    pub statistic: f64,
    pub p_value: f64,
    /// Count of non-zero differences actually tested.
    pub n_effective: usize,
    pub method: WilcoxonMethod,
}

const EXACT_LIMIT: usize = 12;

/// Run the test. Signed differences are `values[i] - mu0` (one-sample) or
/// `values[i] - other[i]` (paired); zeros are dropped.
pub fn wilcoxon_signed_rank(
    values: &[f64],
    mode: WilcoxonMode<'_>,
) -> Result<WilcoxonResult, StatsError> {
    let diffs: Vec<f64> = match mode {
        WilcoxonMode::OneSample(mu0) => values.iter().map(|v| v - mu0).collect(),
        WilcoxonMode::Paired(other) => {
            if other.len() != values.len() {
                return Err(StatsError::LengthMismatch(values.len(), other.len()));
            }
            values.iter().zip(other).map(|(a, b)| a - b).collect()
        }
    };
    let diffs: Vec<f64> = diffs.into_iter().filter(|d| *d != 0.0).collect();
    if diffs.is_empty() {
        return Err(StatsError::AllZeroDifferences);
    }
    if diffs.iter().any(|d| !d.is_finite()) {
        return Err(StatsError::NonFiniteInput);
    }

    let n = diffs.len();
    let magnitudes: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let ranks = average_ranks(&magnitudes);
    let w_plus: f64 = diffs
        .iter()
        .zip(&ranks)
        .filter(|(d, _)| **d > 0.0)
        .map(|(_, r)| r)
        .sum();

    if n <= EXACT_LIMIT {
        let p = exact_two_sided_p(&ranks, w_plus);
        Ok(WilcoxonResult {
            statistic: w_plus,
            p_value: p,
            n_effective: n,
            method: WilcoxonMethod::Exact,
        })
    } else {
        let nf = n as f64;
        let mean = nf * (nf + 1.0) / 4.0;
        let tie_adjust: f64 = tie_groups(&magnitudes)
            .into_iter()
            .map(|t| {
                let t = t as f64;
                (t * t * t - t) / 48.0
            })
            .sum();
        let variance = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_adjust;
        let dev = w_plus - mean;
        let z = if variance <= 0.0 || dev == 0.0 {
            0.0
        } else {
            // continuity correction toward the mean
            (dev - 0.5 * dev.signum()) / variance.sqrt()
        };
        Ok(WilcoxonResult {
            statistic: w_plus,
            p_value: normal_two_sided_p(z),
            n_effective: n,
            method: WilcoxonMethod::NormalApprox,
        })
    }
}

fn tie_groups(magnitudes: &[f64]) -> Vec<usize> {
    let mut sorted = magnitudes.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut groups = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        if j > i {
            groups.push(j - i + 1);
        }
        i = j + 1;
    }
    groups
}

/// Exact two-sided p by enumerating all sign assignments:
/// 2 * min(P(W <= w), P(W >= w)), capped at 1.
fn exact_two_sided_p(ranks: &[f64], w_obs: f64) -> f64 {
    let n = ranks.len();
    let total = 1u64 << n;
    let mut le = 0u64;
    let mut ge = 0u64;
    for mask in 0..total {
        let w: f64 = (0..n)
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| ranks[i])
            .sum();
        if w <= w_obs + 1e-9 {
            le += 1;
        }
        if w >= w_obs - 1e-9 {
            ge += 1;
        }
    }
    let p = 2.0 * (le.min(ge) as f64) / total as f64;
    p.min(1.0)
}

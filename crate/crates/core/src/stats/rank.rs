//! Spearman rank correlation with average-rank tie handling.
//!
//! Per-user rating tables frequently contain exact ties (models never
//! updated relative to each other), so ranks are fractional. Significance is
//! an exact permutation p-value for n <= 8 and the t approximation above.

use super::dist::student_t_two_sided_p;
use super::StatsError;

/// Fractional (average) ranks, 1-based. Ties share the mean of the rank
/// positions they occupy.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap());
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // positions i..=j (0-based) share rank mean of (i+1)..=(j+1)
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = rank;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len() as f64;
    let mean_a = a.iter().sum::<f64>() / n;
    let mean_b = b.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_a = 0.0;
    let mut var_b = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        cov += (x - mean_a) * (y - mean_b);
        var_a += (x - mean_a).powi(2);
        var_b += (y - mean_b).powi(2);
    }
    if var_a == 0.0 || var_b == 0.0 {
        return None;
    }
    Some(cov / (var_a * var_b).sqrt())
}

/// Spearman rho: Pearson correlation of fractional ranks.
pub fn spearman_rho(a: &[f64], b: &[f64]) -> Result<f64, StatsError> {
    if a.len() != b.len() {
        return Err(StatsError::LengthMismatch(a.len(), b.len()));
    }
    if a.len() < 3 {
        return Err(StatsError::TooFewItems(a.len()));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(StatsError::NonFiniteInput);
    }
    let ranks_a = average_ranks(a);
    let ranks_b = average_ranks(b);
    pearson(&ranks_a, &ranks_b).ok_or(StatsError::ZeroVariance)
}

/// Two-sided p-value for an observed Spearman rho on n items.
///
/// For n <= 8 this is the exact permutation p-value over all n! orderings of
/// untied ranks; above that, `t = rho * sqrt((n-2)/(1-rho^2))` with n-2
/// degrees of freedom.
pub fn spearman_p_value(rho: f64, n: usize) -> f64 {
    assert!(n >= 3, "p-value needs n >= 3");
    if n <= 8 {
        exact_permutation_p(rho, n)
    } else {
        let r2 = rho * rho;
        if r2 >= 1.0 {
            return 0.0;
        }
        let t = rho * ((n as f64 - 2.0) / (1.0 - r2)).sqrt();
        student_t_two_sided_p(t, n as f64 - 2.0)
    }
}

fn exact_permutation_p(rho: f64, n: usize) -> f64 {
    // rho for a permutation of untied ranks: 1 - 6*sum(d^2)/(n(n^2-1)).
    let denom = (n * (n * n - 1)) as f64;
    let target = rho.abs() - 1e-9;
    let mut perm: Vec<usize> = (0..n).collect();
    let mut hits = 0u64;
    let mut total = 0u64;
    loop {
        let d2: usize = perm
            .iter()
            .enumerate()
            .map(|(i, &p)| (i as i64 - p as i64).pow(2) as usize)
            .sum();
        let r = 1.0 - 6.0 * d2 as f64 / denom;
        if r.abs() >= target {
            hits += 1;
        }
        total += 1;
        if !next_permutation(&mut perm) {
            break;
        }
    }
    hits as f64 / total as f64
}

fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

//! Bradley-Terry maximum likelihood on log-strengths.
//!
//! Each battle contributes `log sigma(xi_winner - xi_loser)` to the
//! likelihood; ties are expanded into two directed half-weight outcomes so
//! the model stays symmetric. The fit maximizes the likelihood minus an L2
//! penalty on the log-strengths, which keeps per-user fits with perfect
//! win/loss records finite and makes the mean-zero solution unique.
//!
//! The optimizer is damped Newton (tiny dense systems, second order is
//! cheap) with a minorize-maximize sweep as rescue when the Hessian solve
//! fails or does not yield an ascent direction.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::battle::{BattleLog, ModelId, Outcome, UserId};

use super::{RatingSystem, RatingVector, Subject};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BtConfig {
    /// L2 penalty on log-strengths. Zero reproduces the raw MLE, which
    /// diverges for models with only wins or only losses.
    pub l2_penalty: f64,
    pub max_iterations: usize,
    /// Convergence threshold on the change of the optimized objective.
    pub tolerance: f64,
    /// Display scale: score = anchor + scale * log10(strength).
    pub scale: f64,
    pub anchor: f64,
}

impl Default for BtConfig {
    fn default() -> Self {
        Self {
            l2_penalty: 1e-4,
            max_iterations: 500,
            tolerance: 1e-10,
            scale: 400.0,
            anchor: 1000.0,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum BtError {
    #[error("unknown user")]
    UnknownUser,
    #[error("subject has no battles")]
    NoBattles,
    #[error("model `{0}` has only wins or only losses and l2_penalty is zero; MLE diverges")]
    Degenerate(String),
    #[error("did not converge within {iterations} iterations")]
    NotConverged {
        iterations: usize,
        partial: Box<BtModelFit>,
    },
}

/// Fitted Bradley-Terry model over a log's full model universe.
///
/// `log_strengths` are mean-zero over observed models; unobserved models are
/// NaN (undefined, never defaulted).
#[derive(Debug, Clone, PartialEq)]
pub struct BtModelFit {
    pub log_strengths: Vec<f64>,
    pub observed: Vec<bool>,
    /// Unpenalized data log-likelihood at the returned point.
    pub log_likelihood: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Infinity norm of the penalized-objective gradient at the returned point.
    pub grad_inf_norm: f64,
}

impl BtModelFit {
    pub fn strength(&self, model: ModelId) -> f64 {
        self.log_strengths[model.0 as usize].exp()
    }
}

/// Directed weighted comparisons over a dense local index of observed models.
struct WeightedPairs {
    /// (winner, loser, weight), sorted for deterministic iteration.
    pairs: Vec<(usize, usize, f64)>,
    /// Global model id per local index, ascending.
    model_ids: Vec<ModelId>,
}

impl WeightedPairs {
    fn from_log(log: &BattleLog, subject: Subject) -> Result<Self, BtError> {
        if let Subject::User(user) = subject {
            if (user.0 as usize) >= log.user_count() {
                return Err(BtError::UnknownUser);
            }
        }
        let mut weights: HashMap<(ModelId, ModelId), f64> = HashMap::new();
        let mut seen: Vec<ModelId> = Vec::new();
        for record in &log.records {
            if let Subject::User(user) = subject {
                if record.user != user {
                    continue;
                }
            }
            seen.push(record.model_a);
            seen.push(record.model_b);
            match record.outcome {
                Outcome::AWins => {
                    *weights.entry((record.model_a, record.model_b)).or_insert(0.0) += 1.0;
                }
                Outcome::BWins => {
                    *weights.entry((record.model_b, record.model_a)).or_insert(0.0) += 1.0;
                }
                // BothBad carries no preference signal between the two.
                Outcome::Tie | Outcome::BothBad => {
                    *weights.entry((record.model_a, record.model_b)).or_insert(0.0) += 0.5;
                    *weights.entry((record.model_b, record.model_a)).or_insert(0.0) += 0.5;
                }
            }
        }
        if seen.is_empty() {
            return Err(BtError::NoBattles);
        }
        seen.sort_unstable();
        seen.dedup();
        let local: HashMap<ModelId, usize> =
            seen.iter().enumerate().map(|(i, &m)| (m, i)).collect();
        let mut pairs: Vec<(usize, usize, f64)> = weights
            .into_iter()
            .map(|((w, l), c)| (local[&w], local[&l], c))
            .collect();
        pairs.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        Ok(WeightedPairs {
            pairs,
            model_ids: seen,
        })
    }

    fn n_models(&self) -> usize {
        self.model_ids.len()
    }

    /// Data log-likelihood (no penalty).
    fn log_likelihood(&self, xi: &[f64]) -> f64 {
        self.pairs
            .iter()
            .map(|&(w, l, c)| c * log_sigmoid(xi[w] - xi[l]))
            .sum()
    }

    fn objective(&self, xi: &[f64], l2: f64) -> f64 {
        self.log_likelihood(xi) - 0.5 * l2 * xi.iter().map(|x| x * x).sum::<f64>()
    }

    /// Gradient of the penalized objective.
    fn gradient(&self, xi: &[f64], l2: f64) -> Vec<f64> {
        let mut g = vec![0.0; xi.len()];
        for &(w, l, c) in &self.pairs {
            let q = c * (1.0 - sigmoid(xi[w] - xi[l]));
            g[w] += q;
            g[l] -= q;
        }
        for (gm, &x) in g.iter_mut().zip(xi) {
            *gm -= l2 * x;
        }
        g
    }

    /// Hessian of the penalized objective (row-major, n x n).
    fn hessian(&self, xi: &[f64], l2: f64) -> Vec<f64> {
        let n = xi.len();
        let mut h = vec![0.0; n * n];
        for &(w, l, c) in &self.pairs {
            let p = sigmoid(xi[w] - xi[l]);
            let v = c * p * (1.0 - p);
            h[w * n + w] -= v;
            h[l * n + l] -= v;
            h[w * n + l] += v;
            h[l * n + w] += v;
        }
        for m in 0..n {
            h[m * n + m] -= l2;
        }
        h
    }

    /// One minorize-maximize sweep on strengths, ignoring the penalty.
    fn mm_sweep(&self, xi: &[f64]) -> Vec<f64> {
        let n = xi.len();
        let pi: Vec<f64> = xi.iter().map(|x| x.exp()).collect();
        let mut wins = vec![0.0; n];
        let mut totals: HashMap<(usize, usize), f64> = HashMap::new();
        for &(w, l, c) in &self.pairs {
            wins[w] += c;
            let key = if w < l { (w, l) } else { (l, w) };
            *totals.entry(key).or_insert(0.0) += c;
        }
        let mut new_pi = vec![0.0; n];
        for i in 0..n {
            let mut denom = 0.0;
            for (&(a, b), &c) in &totals {
                if a == i || b == i {
                    let other = if a == i { b } else { a };
                    denom += c / (pi[i] + pi[other]);
                }
            }
            new_pi[i] = if denom > 0.0 {
                (wins[i] / denom).max(1e-12)
            } else {
                pi[i]
            };
        }
        let mut new_xi: Vec<f64> = new_pi.iter().map(|p| p.ln()).collect();
        center(&mut new_xi);
        new_xi
    }

    fn degenerate_model(&self) -> Option<usize> {
        let n = self.n_models();
        let mut wins = vec![0.0; n];
        let mut totals = vec![0.0; n];
        for &(w, l, c) in &self.pairs {
            wins[w] += c;
            totals[w] += c;
            totals[l] += c;
        }
        (0..n).find(|&m| wins[m] == 0.0 || wins[m] == totals[m])
    }
}

fn center(xi: &mut [f64]) {
    let mean = xi.iter().sum::<f64>() / xi.len() as f64;
    for x in xi.iter_mut() {
        *x -= mean;
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let ex = x.exp();
        ex / (1.0 + ex)
    }
}

fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

/// Fit Bradley-Terry log-strengths for a subject by penalized maximum
/// likelihood. The identifiability constraint is mean-zero log-strengths
/// over the subject's observed models.
pub fn compute_bt_fit(
    log: &BattleLog,
    subject: Subject,
    cfg: &BtConfig,
) -> Result<BtModelFit, BtError> {
    let pairs = WeightedPairs::from_log(log, subject)?;
    if cfg.l2_penalty == 0.0 {
        if let Some(m) = pairs.degenerate_model() {
            return Err(BtError::Degenerate(
                log.model_name(pairs.model_ids[m]).to_string(),
            ));
        }
    }

    let n = pairs.n_models();
    let mut xi = vec![0.0; n];
    let mut obj = pairs.objective(&xi, cfg.l2_penalty);
    let mut converged = false;
    let mut iterations = 0;

    for iter in 1..=cfg.max_iterations {
        iterations = iter;
        let grad = pairs.gradient(&xi, cfg.l2_penalty);
        let hess = pairs.hessian(&xi, cfg.l2_penalty);
        let neg_hess: Vec<f64> = hess.iter().map(|v| -v).collect();

        let newton = crate::linalg::solve(&neg_hess, &grad, n)
            .filter(|delta| crate::linalg::dot(&grad, delta) > 0.0);
        // Rescue when the Hessian is singular/ill-conditioned.
        let (candidate, is_newton) = match newton {
            Some(delta) => (delta, true),
            None => {
                let mm = pairs.mm_sweep(&xi);
                (mm.iter().zip(&xi).map(|(a, b)| a - b).collect(), false)
            }
        };

        // Backtracking line search on the penalized objective.
        let mut accepted = None;
        let mut step = 1.0;
        for _ in 0..40 {
            let mut trial: Vec<f64> = xi
                .iter()
                .zip(&candidate)
                .map(|(x, d)| x + step * d)
                .collect();
            center(&mut trial);
            let trial_obj = pairs.objective(&trial, cfg.l2_penalty);
            if trial_obj >= obj {
                accepted = Some((trial, trial_obj));
                break;
            }
            step *= 0.5;
        }

        let Some((next_xi, next_obj)) = accepted else {
            // No direction improves: we are at a stationary point.
            converged = true;
            break;
        };
        let improvement = next_obj - obj;
        xi = next_xi;
        obj = next_obj;
        if improvement.abs() < cfg.tolerance && is_newton {
            converged = true;
            break;
        }
    }

    let grad = pairs.gradient(&xi, cfg.l2_penalty);
    let grad_inf_norm = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
    let mut log_strengths = vec![f64::NAN; log.model_count()];
    let mut observed = vec![false; log.model_count()];
    for (local, &model) in pairs.model_ids.iter().enumerate() {
        log_strengths[model.0 as usize] = xi[local];
        observed[model.0 as usize] = true;
    }
    let fit = BtModelFit {
        log_strengths,
        observed,
        log_likelihood: pairs.log_likelihood(&xi),
        converged,
        iterations,
        grad_inf_norm,
    };
    if !converged {
        return Err(BtError::NotConverged {
            iterations,
            partial: Box::new(fit),
        });
    }
    Ok(fit)
}

/// BT fits for many users, computed in parallel over a shared log. Output
/// order matches `users`.
pub fn compute_bt_fits(
    log: &BattleLog,
    users: &[UserId],
    cfg: &BtConfig,
) -> Vec<Result<BtModelFit, BtError>> {
    users
        .par_iter()
        .map(|&u| compute_bt_fit(log, Subject::User(u), cfg))
        .collect()
}

/// Map a fit onto the display scale: `anchor + scale * log10(strength)` for
/// observed models, NaN elsewhere. Rank statistics are invariant to this.
pub fn bt_display_scale(fit: &BtModelFit, cfg: &BtConfig) -> RatingVector {
    let ln10 = std::f64::consts::LN_10;
    let scores = fit
        .log_strengths
        .iter()
        .map(|&xi| {
            if xi.is_nan() {
                f64::NAN
            } else {
                cfg.anchor + cfg.scale * (xi / ln10)
            }
        })
        .collect();
    RatingVector {
        system: RatingSystem::BradleyTerry,
        scores,
        observed: fit.observed.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::battle::parse_canonical;

    fn line(user: &str, a: &str, b: &str, outcome: &str) -> String {
        format!(
            "{{\"user_id\":\"{user}\",\"model_a\":\"{a}\",\"model_b\":\"{b}\",\"outcome\":\"{outcome}\",\"prompt\":\"q\"}}\n"
        )
    }

    fn log_from(lines: &[String]) -> crate::battle::BattleLog {
        parse_canonical(lines.concat().as_bytes()).unwrap()
    }

    fn no_penalty() -> BtConfig {
        BtConfig {
            l2_penalty: 0.0,
            ..BtConfig::default()
        }
    }

    #[test]
    fn two_model_win_fraction() {
        // A beats B 3 times, B beats A once: MLE gives beta_A/beta_B = 3.
        let lines = vec![
            line("u", "A", "B", "a_wins"),
            line("u", "A", "B", "a_wins"),
            line("u", "A", "B", "a_wins"),
            line("u", "B", "A", "a_wins"),
        ];
        let log = log_from(&lines);
        let fit = compute_bt_fit(&log, Subject::Global, &no_penalty()).unwrap();
        let ratio = fit.strength(crate::battle::ModelId(0)) / fit.strength(crate::battle::ModelId(1));
        assert!((ratio - 3.0).abs() < 1e-6, "ratio={ratio}");
        assert!((fit.log_strengths[0] + fit.log_strengths[1]).abs() < 1e-9);
    }

    #[test]
    fn all_ties_give_equal_strengths() {
        let lines = vec![line("u", "A", "B", "tie"), line("u", "A", "B", "tie")];
        let log = log_from(&lines);
        let fit = compute_bt_fit(&log, Subject::Global, &BtConfig::default()).unwrap();
        assert!((fit.log_strengths[0] - fit.log_strengths[1]).abs() < 1e-9);
    }

    #[test]
    fn one_win_cycle_is_symmetric() {
        let lines = vec![
            line("u", "A", "B", "a_wins"),
            line("u", "B", "C", "a_wins"),
            line("u", "C", "A", "a_wins"),
        ];
        let log = log_from(&lines);
        let fit = compute_bt_fit(&log, Subject::Global, &no_penalty()).unwrap();
        for m in 0..3 {
            assert!(fit.log_strengths[m].abs() < 1e-6, "xi={:?}", fit.log_strengths);
        }
    }

    #[test]
    fn gradient_small_at_optimum() {
        let lines = vec![
            line("u", "A", "B", "a_wins"),
            line("u", "B", "C", "a_wins"),
            line("u", "A", "C", "tie"),
            line("u", "C", "A", "a_wins"),
            line("u", "B", "A", "both_bad"),
        ];
        let log = log_from(&lines);
        let fit = compute_bt_fit(&log, Subject::Global, &BtConfig::default()).unwrap();
        assert!(fit.grad_inf_norm < 1e-6, "grad={}", fit.grad_inf_norm);
        assert!(fit.converged);
    }

    #[test]
    fn mean_zero_over_observed() {
        let lines = vec![
            line("u", "A", "B", "a_wins"),
            line("u", "C", "D", "b_wins"),
            line("u", "A", "C", "a_wins"),
        ];
        let log = log_from(&lines);
        let fit = compute_bt_fit(&log, Subject::Global, &BtConfig::default()).unwrap();
        let sum: f64 = fit.log_strengths.iter().filter(|x| !x.is_nan()).sum();
        assert!(sum.abs() < 1e-9);
    }

    #[test]
    fn unobserved_models_are_nan() {
        let lines = vec![line("u", "A", "B", "a_wins"), line("v", "C", "D", "tie")];
        let log = log_from(&lines);
        let user = log.user_id("u").unwrap();
        let fit = compute_bt_fit(&log, Subject::User(user), &BtConfig::default()).unwrap();
        assert!(fit.log_strengths[2].is_nan());
        assert!(fit.log_strengths[3].is_nan());
        assert!(!fit.observed[2]);
    }

    #[test]
    fn degenerate_only_without_penalty() {
        // A wins every battle: raw MLE diverges, penalized fit is finite.
        let lines = vec![line("u", "A", "B", "a_wins"), line("u", "A", "B", "a_wins")];
        let log = log_from(&lines);
        match compute_bt_fit(&log, Subject::Global, &no_penalty()).unwrap_err() {
            BtError::Degenerate(name) => assert_eq!(name, "A"),
            other => panic!("unexpected: {other:?}"),
        }
        let fit = compute_bt_fit(&log, Subject::Global, &BtConfig::default()).unwrap();
        assert!(fit.log_strengths[0].is_finite());
        assert!(fit.log_strengths[0] > fit.log_strengths[1]);
    }

    #[test]
    fn not_converged_carries_partial_fit() {
        let lines = vec![
            line("u", "A", "B", "a_wins"),
            line("u", "A", "B", "a_wins"),
            line("u", "B", "A", "a_wins"),
        ];
        let log = log_from(&lines);
        let cfg = BtConfig {
            max_iterations: 1,
            ..BtConfig::default()
        };
        match compute_bt_fit(&log, Subject::Global, &cfg).unwrap_err() {
            BtError::NotConverged { iterations, partial } => {
                assert_eq!(iterations, 1);
                assert!(!partial.converged);
                assert!(partial.log_strengths[0].is_finite());
            }
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn display_scale_fixtures() {
        let lines = vec![line("u", "A", "B", "a_wins")];
        let log = log_from(&lines);
        let fit = BtModelFit {
            log_strengths: vec![std::f64::consts::LN_10 / 2.0, -std::f64::consts::LN_10 / 2.0],
            observed: vec![true, true],
            log_likelihood: 0.0,
            converged: true,
            iterations: 0,
            grad_inf_norm: 0.0,
        };
        let cfg = BtConfig::default();
        let v = bt_display_scale(&fit, &cfg);
        // strength ratio 10 -> exactly 400 points apart
        assert!((v.scores[0] - v.scores[1] - 400.0).abs() < 1e-9);
        let _ = log;

        let equal = BtModelFit {
            log_strengths: vec![0.0, 0.0],
            observed: vec![true, true],
            log_likelihood: 0.0,
            converged: true,
            iterations: 0,
            grad_inf_norm: 0.0,
        };
        let v = bt_display_scale(&equal, &cfg);
        assert_eq!(v.scores, vec![1000.0, 1000.0]);
    }

    #[test]
    fn no_battles_is_an_error() {
        let lines = vec![line("u", "A", "B", "a_wins")];
        let log = log_from(&lines);
        let stranger = crate::battle::UserId(0);
        // user 0 exists; craft a user with no battles by filtering manually
        let mut empty = log.clone();
        empty.records.clear();
        assert!(matches!(
            compute_bt_fit(&empty, Subject::User(stranger), &BtConfig::default()),
            Err(BtError::NoBattles)
        ));
    }
}

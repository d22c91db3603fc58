//! Incremental ELO ratings.
//!
//! Expected score `E_a = 1 / (1 + 10^((R_b - R_a)/400))`; after each battle
//! the winner gains `K (1 - E)` and the loser loses the matching amount, so
//! the sum of the two ratings is conserved. Replay is strictly sequential in
//! source order — the result is order- and multiplicity-sensitive.

use rayon::prelude::*;

use crate::battle::{BattleLog, Outcome, UserId};

use super::{RatingSystem, RatingVector, Subject};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EloConfig {
    pub k_factor: f64,
    pub initial_rating: f64,
}

impl Default for EloConfig {
    fn default() -> Self {
        Self {
            k_factor: 32.0,
            initial_rating: 1000.0,
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum EloError {
    #[error("rating is not finite")]
    NonFiniteRating,
    #[error("unknown user")]
    UnknownUser,
}

/// Expected score of the first player: `1 / (1 + 10^((r_b - r_a)/400))`.
pub fn elo_expected_score(rating_a: f64, rating_b: f64) -> Result<f64, EloError> {
    if !rating_a.is_finite() || !rating_b.is_finite() {
        return Err(EloError::NonFiniteRating);
    }
    Ok(1.0 / (1.0 + 10f64.powf((rating_b - rating_a) / 400.0)))
}

/// One rating update. `outcome` must already have `BothBad` collapsed to
/// `Tie`; ties score 0.5 for both sides.
pub fn elo_update(
    rating_a: f64,
    rating_b: f64,
    outcome: Outcome,
    cfg: &EloConfig,
) -> Result<(f64, f64), EloError> {
    let expected_a = elo_expected_score(rating_a, rating_b)?;
    let expected_b = 1.0 - expected_a;
    let (score_a, score_b) = match outcome {
        Outcome::AWins => (1.0, 0.0),
        Outcome::BWins => (0.0, 1.0),
        Outcome::Tie | Outcome::BothBad => (0.5, 0.5),
    };
    Ok((
        rating_a + cfg.k_factor * (score_a - expected_a),
        rating_b + cfg.k_factor * (score_b - expected_b),
    ))
}

/// Replay the subject's battles in sequence order and return the resulting
/// table over the log's full model universe.
pub fn compute_elo_table(
    log: &BattleLog,
    subject: Subject,
    cfg: &EloConfig,
) -> Result<RatingVector, EloError> {
    if let Subject::User(user) = subject {
        if (user.0 as usize) >= log.user_count() {
            return Err(EloError::UnknownUser);
        }
    }
    let n = log.model_count();
    let mut scores = vec![cfg.initial_rating; n];
    let mut observed = vec![false; n];
    for record in &log.records {
        match subject {
            Subject::Global => {}
            Subject::User(user) => {
                if record.user != user {
                    continue;
                }
            }
        }
        let a = record.model_a.0 as usize;
        let b = record.model_b.0 as usize;
        let (new_a, new_b) = elo_update(scores[a], scores[b], record.outcome, cfg)?;
        scores[a] = new_a;
        scores[b] = new_b;
        observed[a] = true;
        observed[b] = true;
    }
    Ok(RatingVector {
        system: RatingSystem::Elo,
        scores,
        observed,
    })
}

/// ELO tables for many users, computed in parallel over a shared log.
/// Output order matches `users`; results are identical regardless of the
/// number of worker threads.
pub fn compute_elo_tables(
    log: &BattleLog,
    users: &[UserId],
    cfg: &EloConfig,
) -> Result<Vec<RatingVector>, EloError> {
    users
        .par_iter()
        .map(|&u| compute_elo_table(log, Subject::User(u), cfg))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::battle::parse_canonical;
    use proptest::prelude::*;

    fn line(user: &str, a: &str, b: &str, outcome: &str) -> String {
        format!(
            "{{\"user_id\":\"{user}\",\"model_a\":\"{a}\",\"model_b\":\"{b}\",\"outcome\":\"{outcome}\",\"prompt\":\"q\"}}\n"
        )
    }

    #[test]
    fn expected_score_fixtures() {
        assert_eq!(elo_expected_score(1000.0, 1000.0).unwrap(), 0.5);
        let favored = elo_expected_score(1400.0, 1000.0).unwrap();
        assert!((favored - 10.0 / 11.0).abs() < 1e-12);
        let underdog = elo_expected_score(600.0, 1000.0).unwrap();
        assert!((underdog - 1.0 / 11.0).abs() < 1e-12);
    }

    #[test]
    fn expected_score_rejects_non_finite() {
        assert_eq!(
            elo_expected_score(f64::NAN, 1000.0).unwrap_err(),
            EloError::NonFiniteRating
        );
        assert_eq!(
            elo_expected_score(1000.0, f64::INFINITY).unwrap_err(),
            EloError::NonFiniteRating
        );
    }

    #[test]
    fn update_fixtures() {
        let cfg = EloConfig::default();
        let (a, b) = elo_update(1000.0, 1000.0, Outcome::AWins, &cfg).unwrap();
        assert_eq!((a, b), (1016.0, 984.0));

        let (a, b) = elo_update(1000.0, 1000.0, Outcome::Tie, &cfg).unwrap();
        assert_eq!((a, b), (1000.0, 1000.0));

        // Favorite loses: transfers 32 * 10/11.
        let (a, b) = elo_update(1400.0, 1000.0, Outcome::BWins, &cfg).unwrap();
        assert!((a - (1400.0 - 320.0 / 11.0)).abs() < 1e-9);
        assert!((b - (1000.0 + 320.0 / 11.0)).abs() < 1e-9);
    }

    #[test]
    fn single_battle_table() {
        let text = line("u", "A", "B", "a_wins") + &line("u2", "C", "D", "tie");
        let log = parse_canonical(text.as_bytes()).unwrap();
        let table = compute_elo_table(&log, Subject::User(log.user_id("u").unwrap()), &EloConfig::default()).unwrap();
        assert_eq!(table.scores[0], 1016.0);
        assert_eq!(table.scores[1], 984.0);
        // models C, D untouched for this user: exactly the initial rating, unobserved.
        assert_eq!(table.scores[2], 1000.0);
        assert!(!table.observed[2]);
        assert_eq!(table.observed, vec![true, true, false, false]);
    }

    #[test]
    fn replay_is_multiplicity_sensitive() {
        // One pass vs two passes over the same battle give different tables.
        let once = parse_canonical(line("u", "A", "B", "a_wins").as_bytes()).unwrap();
        let twice = parse_canonical(
            (line("u", "A", "B", "a_wins") + &line("u", "A", "B", "a_wins")).as_bytes(),
        )
        .unwrap();
        let cfg = EloConfig::default();
        let t1 = compute_elo_table(&once, Subject::Global, &cfg).unwrap();
        let t2 = compute_elo_table(&twice, Subject::Global, &cfg).unwrap();
        assert_eq!(t1.scores[0], 1016.0);
        // second step hand-replayed: E_a = 1/(1+10^(-32/400))
        assert!((t2.scores[0] - 1030.5304984710244).abs() < 1e-9);
        assert!((t2.scores[1] - 969.4695015289755).abs() < 1e-9);
        assert_ne!(t1.scores, t2.scores);
    }

    #[test]
    fn unknown_user_rejected() {
        let log = parse_canonical(line("u", "A", "B", "a_wins").as_bytes()).unwrap();
        assert_eq!(
            compute_elo_table(&log, Subject::User(UserId(5)), &EloConfig::default()).unwrap_err(),
            EloError::UnknownUser
        );
    }

    #[test]
    fn determinism_bit_identical() {
        let text = line("u", "A", "B", "a_wins")
            + &line("u", "B", "C", "b_wins")
            + &line("u", "A", "C", "tie")
            + &line("u", "C", "A", "both_bad");
        let log = parse_canonical(text.as_bytes()).unwrap();
        let cfg = EloConfig::default();
        let t1 = compute_elo_table(&log, Subject::Global, &cfg).unwrap();
        let t2 = compute_elo_table(&log, Subject::Global, &cfg).unwrap();
        assert_eq!(t1.scores, t2.scores);
    }

    proptest! {
        // Rating transfer: every update conserves the pair sum when E_a + E_b = 1.
        #[test]
        fn transfer_conservation(
            ra in 200.0f64..1800.0,
            rb in 200.0f64..1800.0,
            outcome_pick in 0u8..3,
        ) {
            let outcome = match outcome_pick {
                0 => Outcome::AWins,
                1 => Outcome::BWins,
                _ => Outcome::Tie,
            };
            let (na, nb) = elo_update(ra, rb, outcome, &EloConfig::default()).unwrap();
            prop_assert!(((na + nb) - (ra + rb)).abs() < 1e-9);
        }

        // Complement: E(a,b) + E(b,a) = 1.
        #[test]
        fn expected_score_complement(ra in 0.0f64..3000.0, rb in 0.0f64..3000.0) {
            let ea = elo_expected_score(ra, rb).unwrap();
            let eb = elo_expected_score(rb, ra).unwrap();
            prop_assert!(ea > 0.0 && ea < 1.0);
            prop_assert!((ea + eb - 1.0).abs() < 1e-12);
        }
    }
}

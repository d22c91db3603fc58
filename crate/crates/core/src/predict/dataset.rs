//! Regression dataset assembly and standardization.
//!
//! Inputs are user profiles (topic + style features) and per-user rating
//! vectors; targets are the ratings of the most-battled models. Entries a
//! user never observed are imputed with the training-split per-model mean,
//! computed after the split and applied to both splits, with the imputation
//! mask carried so evaluation can also be reported on real entries only.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::rating::{RatingSystem, RatingVector};

/// Number of target models and the split proportions of the reference
/// population (97 train / 18 validation of 115).
pub const TARGET_MODELS: usize = 20;
const SPLIT_VALIDATION_NUM: usize = 18;
const SPLIT_TOTAL: usize = 115;
pub const MIN_USERS: usize = 20;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum DatasetError {
    #[error("need at least {min} users, got {got}", min = MIN_USERS)]
    TooFewUsers { got: usize },
    #[error("profiles and ratings cover different users: `{0}` missing")]
    UserMismatch(String),
    #[error("validation split is empty")]
    EmptyValidation,
}

#[derive(Debug, Clone)]
pub struct RegressionDataset {
    pub system: RatingSystem,
    pub user_ids: Vec<String>,
    pub features: Vec<Vec<f64>>,
    pub targets: Vec<Vec<f64>>,
    pub imputed: Vec<Vec<bool>>,
    pub is_validation: Vec<bool>,
    /// Target model names, most-battled first.
    pub target_models: Vec<String>,
    /// Set when fewer than [`TARGET_MODELS`] models existed and all were used.
    pub fallback_all_models: bool,
}

impl RegressionDataset {
    pub fn train_indices(&self) -> Vec<usize> {
        (0..self.user_ids.len())
            .filter(|&i| !self.is_validation[i])
            .collect()
    }

    pub fn validation_indices(&self) -> Vec<usize> {
        (0..self.user_ids.len())
            .filter(|&i| self.is_validation[i])
            .collect()
    }
}

/// Assemble the dataset.
///
/// `profiles` are `(user_id, feature vector)`; `ratings` are `(user_id,
/// personal rating vector over the full model universe)`; `model_names` and
/// `battle_counts` are aligned with the rating-vector indices.
pub fn build_dataset(
    profiles: &[(String, Vec<f64>)],
    ratings: &[(String, RatingVector)],
    model_names: &[String],
    battle_counts: &[usize],
    system: RatingSystem,
    split_seed: u64,
) -> Result<RegressionDataset, DatasetError> {
    let n = profiles.len();
    if n < MIN_USERS {
        return Err(DatasetError::TooFewUsers { got: n });
    }
    let rating_by_user: HashMap<&str, &RatingVector> = ratings
        .iter()
        .map(|(u, v)| (u.as_str(), v))
        .collect();
    for (user, _) in profiles {
        if !rating_by_user.contains_key(user.as_str()) {
            return Err(DatasetError::UserMismatch(user.clone()));
        }
    }

    // target universe: most-battled models first, ties by model index
    let mut order: Vec<usize> = (0..model_names.len()).collect();
    order.sort_by(|&a, &b| battle_counts[b].cmp(&battle_counts[a]).then(a.cmp(&b)));
    let fallback_all_models = order.len() < TARGET_MODELS;
    order.truncate(TARGET_MODELS);
    let target_models: Vec<String> = order.iter().map(|&i| model_names[i].clone()).collect();

    // raw targets with missing entries
    let mut raw: Vec<Vec<Option<f64>>> = Vec::with_capacity(n);
    for (user, _) in profiles {
        let vector = rating_by_user[user.as_str()];
        let row = order
            .iter()
            .map(|&m| {
                let score = vector.scores[m];
                if vector.observed[m] && !score.is_nan() {
                    Some(score)
                } else {
                    None
                }
            })
            .collect();
        raw.push(row);
    }

    // seeded split, proportional to the 97/18 reference
    let n_val = ((n * SPLIT_VALIDATION_NUM + SPLIT_TOTAL / 2) / SPLIT_TOTAL).max(1);
    let mut shuffled: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(split_seed);
    for i in (1..shuffled.len()).rev() {
        let j = rng.gen_range(0..=i);
        shuffled.swap(i, j);
    }
    let mut is_validation = vec![false; n];
    for &i in shuffled.iter().take(n_val) {
        is_validation[i] = true;
    }
    // rows with no real entries at all carry no evaluable signal: keep them
    // in training only
    for i in 0..n {
        if is_validation[i] && raw[i].iter().all(Option::is_none) {
            is_validation[i] = false;
        }
    }
    if is_validation.iter().all(|&v| !v) {
        return Err(DatasetError::EmptyValidation);
    }

    // per-model imputation means from the training split
    let m = order.len();
    let mut fill = vec![0.0f64; m];
    let grand_mean = {
        let values: Vec<f64> = raw.iter().flatten().filter_map(|v| *v).collect();
        if values.is_empty() {
            0.0
        } else {
            values.iter().sum::<f64>() / values.len() as f64
        }
    };
    for (col, f) in fill.iter_mut().enumerate() {
        let train_vals: Vec<f64> = (0..n)
            .filter(|&i| !is_validation[i])
            .filter_map(|i| raw[i][col])
            .collect();
        *f = if !train_vals.is_empty() {
            train_vals.iter().sum::<f64>() / train_vals.len() as f64
        } else {
            // no training user observed this model
            let any: Vec<f64> = (0..n).filter_map(|i| raw[i][col]).collect();
            if any.is_empty() {
                grand_mean
            } else {
                any.iter().sum::<f64>() / any.len() as f64
            }
        };
    }

    let mut targets = Vec::with_capacity(n);
    let mut imputed = Vec::with_capacity(n);
    for row in &raw {
        let mut t = Vec::with_capacity(m);
        let mut mask = Vec::with_capacity(m);
        for (col, v) in row.iter().enumerate() {
            match v {
                Some(x) => {
                    t.push(*x);
                    mask.push(false);
                }
                None => {
                    t.push(fill[col]);
                    mask.push(true);
                }
            }
        }
        targets.push(t);
        imputed.push(mask);
    }

    Ok(RegressionDataset {
        system,
        user_ids: profiles.iter().map(|(u, _)| u.clone()).collect(),
        features: profiles.iter().map(|(_, x)| x.clone()).collect(),
        targets,
        imputed,
        is_validation,
        target_models,
        fallback_all_models,
    })
}

/// Per-dimension affine standardizer fitted on training rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    /// Dimensions whose sample deviation hit the 1e-8 floor.
    pub floored: Vec<bool>,
}

const SIGMA_FLOOR: f64 = 1e-8;

impl Standardizer {
    /// Fit on the given rows (sample standard deviation, n-1).
    pub fn fit(rows: &[&Vec<f64>]) -> Self {
        assert!(rows.len() >= 2, "need at least 2 rows to standardize");
        let dim = rows[0].len();
        let n = rows.len() as f64;
        let mut mean = vec![0.0; dim];
        for row in rows {
            for (m, x) in mean.iter_mut().zip(row.iter()) {
                *m += x;
            }
        }
        for m in mean.iter_mut() {
            *m /= n;
        }
        let mut std = vec![0.0; dim];
        for row in rows {
            for ((s, x), m) in std.iter_mut().zip(row.iter()).zip(&mean) {
                *s += (x - m) * (x - m);
            }
        }
        let mut floored = vec![false; dim];
        for (s, f) in std.iter_mut().zip(floored.iter_mut()) {
            *s = (*s / (n - 1.0)).sqrt();
            if *s < SIGMA_FLOOR {
                *s = SIGMA_FLOOR;
                *f = true;
            }
        }
        Standardizer { mean, std, floored }
    }

    pub fn transform(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(&self.mean)
            .zip(&self.std)
            .map(|((x, m), s)| (x - m) / s)
            .collect()
    }

    pub fn invert(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(&self.mean)
            .zip(&self.std)
            .map(|((z, m), s)| z * s + m)
            .collect()
    }
}

/// Feature and target standardizers fitted on the training split only.
#[derive(Debug, Clone)]
pub struct DatasetStandardizers {
    pub x: Standardizer,
    pub y: Standardizer,
}

pub fn fit_standardizers(dataset: &RegressionDataset) -> DatasetStandardizers {
    let train = dataset.train_indices();
    let x_rows: Vec<&Vec<f64>> = train.iter().map(|&i| &dataset.features[i]).collect();
    let y_rows: Vec<&Vec<f64>> = train.iter().map(|&i| &dataset.targets[i]).collect();
    DatasetStandardizers {
        x: Standardizer::fit(&x_rows),
        y: Standardizer::fit(&y_rows),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn synthetic_inputs(
        users: usize,
        models: usize,
        seed: u64,
    ) -> (
        Vec<(String, Vec<f64>)>,
        Vec<(String, RatingVector)>,
        Vec<String>,
        Vec<usize>,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model_names: Vec<String> = (0..models).map(|m| format!("model_{m:02}")).collect();
        let battle_counts: Vec<usize> = (0..models).map(|m| 1000 - m * 7).collect();
        let mut profiles = Vec::new();
        let mut ratings = Vec::new();
        for u in 0..users {
            let user = format!("user_{u:03}");
            profiles.push((
                user.clone(),
                (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            ));
            let observed: Vec<bool> = (0..models).map(|_| rng.gen_bool(0.8)).collect();
            let scores: Vec<f64> = observed
                .iter()
                .map(|&o| if o { rng.gen_range(900.0..1100.0) } else { 1000.0 })
                .collect();
            ratings.push((
                user,
                RatingVector {
                    system: RatingSystem::Elo,
                    scores,
                    observed,
                },
            ));
        }
        (profiles, ratings, model_names, battle_counts)
    }

    #[test]
    fn reference_population_splits_97_18() {
        let (profiles, ratings, names, counts) = synthetic_inputs(115, 25, 1);
        let ds = build_dataset(&profiles, &ratings, &names, &counts, RatingSystem::Elo, 7)
            .unwrap();
        assert_eq!(ds.validation_indices().len(), 18);
        assert_eq!(ds.train_indices().len(), 97);
        assert_eq!(ds.target_models.len(), 20);
        assert!(!ds.fallback_all_models);
        // most-battled model first
        assert_eq!(ds.target_models[0], "model_00");
    }

    #[test]
    fn full_observer_has_empty_mask() {
        let (profiles, mut ratings, names, counts) = synthetic_inputs(30, 22, 2);
        for (_, v) in ratings.iter_mut() {
            v.observed = vec![true; 22];
        }
        let ds = build_dataset(&profiles, &ratings, &names, &counts, RatingSystem::Elo, 7)
            .unwrap();
        for mask in &ds.imputed {
            assert!(mask.iter().all(|&m| !m));
        }
    }

    #[test]
    fn blank_row_is_imputed_and_kept_out_of_validation() {
        let (profiles, mut ratings, names, counts) = synthetic_inputs(30, 22, 3);
        // user 000 saw nothing
        ratings[0].1.observed = vec![false; 22];
        let ds = build_dataset(&profiles, &ratings, &names, &counts, RatingSystem::Elo, 7)
            .unwrap();
        assert!(ds.imputed[0].iter().all(|&m| m));
        assert!(!ds.is_validation[0]);
        // imputed values equal the per-model training mean
        let train: Vec<usize> = ds
            .train_indices()
            .into_iter()
            .filter(|&i| i != 0 && !ds.imputed[i][0])
            .collect();
        let mean: f64 =
            train.iter().map(|&i| ds.targets[i][0]).sum::<f64>() / train.len() as f64;
        assert!((ds.targets[0][0] - mean).abs() < 1e-12);
    }

    #[test]
    fn fewer_models_falls_back_to_all() {
        let (profiles, ratings, names, counts) = synthetic_inputs(30, 8, 4);
        let ds = build_dataset(&profiles, &ratings, &names, &counts, RatingSystem::Elo, 7)
            .unwrap();
        assert!(ds.fallback_all_models);
        assert_eq!(ds.target_models.len(), 8);
    }

    #[test]
    fn too_few_users_rejected() {
        let (profiles, ratings, names, counts) = synthetic_inputs(10, 22, 5);
        assert_eq!(
            build_dataset(&profiles, &ratings, &names, &counts, RatingSystem::Elo, 7)
                .unwrap_err(),
            DatasetError::TooFewUsers { got: 10 }
        );
    }

    #[test]
    fn user_mismatch_rejected() {
        let (profiles, mut ratings, names, counts) = synthetic_inputs(25, 22, 6);
        ratings.pop();
        match build_dataset(&profiles, &ratings, &names, &counts, RatingSystem::Elo, 7) {
            Err(DatasetError::UserMismatch(u)) => assert_eq!(u, "user_024"),
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn split_is_seeded() {
        let (profiles, ratings, names, counts) = synthetic_inputs(40, 22, 7);
        let a = build_dataset(&profiles, &ratings, &names, &counts, RatingSystem::Elo, 1)
            .unwrap();
        let b = build_dataset(&profiles, &ratings, &names, &counts, RatingSystem::Elo, 1)
            .unwrap();
        let c = build_dataset(&profiles, &ratings, &names, &counts, RatingSystem::Elo, 2)
            .unwrap();
        assert_eq!(a.is_validation, b.is_validation);
        assert_ne!(a.is_validation, c.is_validation);
    }

    #[test]
    fn standardizer_contract() {
        let (profiles, ratings, names, counts) = synthetic_inputs(50, 22, 8);
        let ds = build_dataset(&profiles, &ratings, &names, &counts, RatingSystem::Elo, 7)
            .unwrap();
        let std = fit_standardizers(&ds);
        let train = ds.train_indices();
        let dim = ds.features[0].len();
        let transformed: Vec<Vec<f64>> = train
            .iter()
            .map(|&i| std.x.transform(&ds.features[i]))
            .collect();
        for d in 0..dim {
            let n = transformed.len() as f64;
            let mean: f64 = transformed.iter().map(|r| r[d]).sum::<f64>() / n;
            let var: f64 =
                transformed.iter().map(|r| (r[d] - mean).powi(2)).sum::<f64>() / (n - 1.0);
            assert!(mean.abs() < 1e-9, "dim {d} mean {mean}");
            assert!((var.sqrt() - 1.0).abs() < 1e-6, "dim {d} std {}", var.sqrt());
        }
        // transform then invert is the identity
        for &i in &train[..5] {
            let round = std.y.invert(&std.y.transform(&ds.targets[i]));
            for (a, b) in round.iter().zip(&ds.targets[i]) {
                assert!((a - b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn constant_column_is_floored_to_zero() {
        let rows_owned: Vec<Vec<f64>> = (0..10).map(|i| vec![5.0, i as f64]).collect();
        let rows: Vec<&Vec<f64>> = rows_owned.iter().collect();
        let std = Standardizer::fit(&rows);
        assert!(std.floored[0]);
        assert!(!std.floored[1]);
        let t = std.transform(&rows_owned[3]);
        assert_eq!(t[0], 0.0);
    }

    #[test]
    fn validation_standardized_with_training_statistics() {
        // a validation distribution shifted from training keeps a nonzero
        // mean after standardization
        let train_rows_owned: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64]).collect();
        let train_rows: Vec<&Vec<f64>> = train_rows_owned.iter().collect();
        let std = Standardizer::fit(&train_rows);
        let val_rows: Vec<Vec<f64>> = (0..10).map(|i| vec![100.0 + i as f64]).collect();
        let mean: f64 = val_rows
            .iter()
            .map(|r| std.transform(r)[0])
            .sum::<f64>()
            / val_rows.len() as f64;
        assert!(mean > 5.0, "shifted validation mean should stay shifted: {mean}");
    }
}

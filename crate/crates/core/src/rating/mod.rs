//! Rating engines: sequential ELO replay and Bradley-Terry maximum
//! likelihood, plus the observed-model restriction used by all divergence
//! statistics.

mod bt;
mod elo;

pub use bt::{compute_bt_fit, compute_bt_fits, bt_display_scale, BtConfig, BtError, BtModelFit};
pub use elo::{compute_elo_table, compute_elo_tables, elo_expected_score, elo_update, EloConfig, EloError};

use crate::battle::ModelId;

/// Which rating system produced a vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RatingSystem {
    Elo,
    BradleyTerry,
}

impl std::fmt::Display for RatingSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RatingSystem::Elo => write!(f, "elo"),
            RatingSystem::BradleyTerry => write!(f, "bt"),
        }
    }
}

/// The entity a rating vector belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subject {
    Global,
    User(crate::battle::UserId),
}

/// Scores over the full model universe of a log for one rated subject.
///
/// `scores` is indexed by dense model id. Models the subject never battled
/// are "unobserved": ELO keeps them at exactly the initial rating, while
/// Bradley-Terry marks them NaN (undefined).
#[derive(Debug, Clone, PartialEq)]
pub struct RatingVector {
    pub system: RatingSystem,
    pub scores: Vec<f64>,
    pub observed: Vec<bool>,
}

impl RatingVector {
    pub fn observed_count(&self) -> usize {
        self.observed.iter().filter(|&&o| o).count()
    }

    pub fn score(&self, model: ModelId) -> f64 {
        self.scores[model.0 as usize]
    }

    pub fn is_observed(&self, model: ModelId) -> bool {
        self.observed[model.0 as usize]
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum RestrictError {
    #[error("rating vectors cover different model universes ({0} vs {1})")]
    UniverseMismatch(usize, usize),
    #[error("fewer than 3 models remain after restriction ({0})")]
    TooFewModels(usize),
}

/// Aligned personal/global score lists over the personal observed set.
#[derive(Debug, Clone, PartialEq)]
pub struct RestrictedScores {
    /// Model ids retained, in canonical (dense id) order.
    pub models: Vec<ModelId>,
    pub personal: Vec<f64>,
    pub global: Vec<f64>,
    /// Observed models dropped because either side was undefined (NaN).
    pub excluded_undefined: usize,
}

/// Keep only models the personal vector actually observed, in canonical
/// model order, dropping entries that are undefined on either side.
pub fn restrict_to_observed(
    personal: &RatingVector,
    global: &RatingVector,
) -> Result<RestrictedScores, RestrictError> {
    if personal.scores.len() != global.scores.len() {
        return Err(RestrictError::UniverseMismatch(
            personal.scores.len(),
            global.scores.len(),
        ));
    }
    let mut models = Vec::new();
    let mut personal_scores = Vec::new();
    let mut global_scores = Vec::new();
    let mut excluded = 0usize;
    for idx in 0..personal.scores.len() {
        if !personal.observed[idx] {
            continue;
        }
        let p = personal.scores[idx];
        let g = global.scores[idx];
        if p.is_nan() || g.is_nan() {
            excluded += 1;
            continue;
        }
        models.push(ModelId(idx as u32));
        personal_scores.push(p);
        global_scores.push(g);
    }
    if models.len() < 3 {
        return Err(RestrictError::TooFewModels(models.len()));
    }
    Ok(RestrictedScores {
        models,
        personal: personal_scores,
        global: global_scores,
        excluded_undefined: excluded,
    })
}

//! Style topics: LDA over discretized style features.
//!
//! Each query becomes a pseudo-document of its strongest style-feature
//! indices; one shared topic model is trained over all users' pseudo-
//! documents and every user gets the mean mixture of their queries. This
//! yields a compact "meta-style" simplex per user.

use super::lda::{infer_topic_mixture, train_lda, LdaConfig, TopicModel};
use super::style::{StyleVector, STYLE_DIM};

#[derive(Debug, Clone, PartialEq)]
pub struct StyleTopicsConfig {
    pub topics: usize,
    /// Pseudo-document length: how many top feature indices represent a query.
    pub doc_len: usize,
    pub iterations: usize,
    pub seed: u64,
}

impl StyleTopicsConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            topics: 6,
            doc_len: 6,
            iterations: 500,
            seed,
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum StyleTopicsError {
    #[error("user {0} has no queries")]
    NoQueries(usize),
    #[error("no usable style evidence in the population")]
    NoEvidence,
}

#[derive(Debug)]
pub struct StyleTopics {
    pub model: TopicModel,
    /// Per-user mixture on the style-topic simplex, aligned with the input.
    pub user_mixtures: Vec<Vec<f64>>,
}

/// Feature indices with positive activation, strongest first (ties by index).
fn pseudo_document(style: &StyleVector, doc_len: usize) -> Vec<u32> {
    let mut indexed: Vec<(usize, f64)> = style
        .values
        .iter()
        .copied()
        .enumerate()
        .filter(|&(_, v)| v > 0.0)
        .collect();
    indexed.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    indexed.truncate(doc_len);
    indexed.into_iter().map(|(i, _)| i as u32).collect()
}

/// Train the shared style-topic model and compute per-user mixtures.
pub fn style_topic_mixtures(
    per_user_query_styles: &[Vec<StyleVector>],
    cfg: &StyleTopicsConfig,
) -> Result<StyleTopics, StyleTopicsError> {
    if let Some(idx) = per_user_query_styles.iter().position(|q| q.is_empty()) {
        return Err(StyleTopicsError::NoQueries(idx));
    }
    let per_user_docs: Vec<Vec<Vec<u32>>> = per_user_query_styles
        .iter()
        .map(|queries| {
            queries
                .iter()
                .map(|s| pseudo_document(s, cfg.doc_len))
                .collect()
        })
        .collect();

    // empty pseudo-documents (blank queries) are excluded from training
    let training: Vec<Vec<u32>> = per_user_docs
        .iter()
        .flatten()
        .filter(|d| !d.is_empty())
        .cloned()
        .collect();
    if training.is_empty() {
        return Err(StyleTopicsError::NoEvidence);
    }

    let lda_cfg = LdaConfig {
        topics: cfg.topics,
        iterations: cfg.iterations,
        seed: cfg.seed,
        ..LdaConfig::new(cfg.topics, cfg.seed)
    };
    let model = train_lda(&training, STYLE_DIM, &lda_cfg).expect("nonempty training corpus");

    let user_mixtures = per_user_docs
        .iter()
        .map(|docs| {
            let k = cfg.topics;
            let mut mean = vec![0.0; k];
            for d in docs {
                let mix = infer_topic_mixture(&model, d);
                for (m, t) in mean.iter_mut().zip(&mix.theta) {
                    *m += t;
                }
            }
            for m in mean.iter_mut() {
                *m /= docs.len() as f64;
            }
            mean
        })
        .collect();

    Ok(StyleTopics {
        model,
        user_mixtures,
    })
}

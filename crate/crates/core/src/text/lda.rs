//! Latent Dirichlet allocation by collapsed Gibbs sampling.
//!
//! Documents are vocabulary-id token lists. Training runs a fixed number of
//! full sweeps with a seeded generator; inference folds a new document in
//! against frozen topic-word counts (burn-in then averaged sweeps), so both
//! are deterministic for a fixed seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::seeding::fnv1a;

#[derive(Debug, Clone, PartialEq)]
pub struct LdaConfig {
    pub topics: usize,
    /// Document-topic prior; the classic default is 50/K.
    pub alpha: f64,
    /// Topic-word prior.
    pub eta: f64,
    pub iterations: usize,
    pub seed: u64,
}

impl LdaConfig {
    pub fn new(topics: usize, seed: u64) -> Self {
        Self {
            topics,
            alpha: 50.0 / topics as f64,
            eta: 0.01,
            iterations: 1000,
            seed,
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum LdaError {
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("document {0} has no in-vocabulary tokens")]
    EmptyDocument(usize),
}

/// Inference result; `fallback` marks documents with no usable tokens, which
/// get the uniform mixture.
#[derive(Debug, Clone, PartialEq)]
pub struct InferredMixture {
    pub theta: Vec<f64>,
    pub fallback: bool,
}

#[derive(Debug, Clone)]
pub struct TopicModel {
    pub config: LdaConfig,
    pub vocab_size: usize,
    topic_word: Vec<u32>,
    topic_totals: Vec<u32>,
    doc_topic: Vec<Vec<u32>>,
    total_tokens: u64,
}

const INFER_BURN_IN: usize = 50;
const INFER_AVERAGE_SWEEPS: usize = 100;

/// Train a topic model on encoded documents.
pub fn train_lda(
    corpus: &[Vec<u32>],
    vocab_size: usize,
    cfg: &LdaConfig,
) -> Result<TopicModel, LdaError> {
    assert!(cfg.topics >= 1 && cfg.alpha > 0.0 && cfg.eta > 0.0);
    if corpus.is_empty() {
        return Err(LdaError::EmptyCorpus);
    }
    if let Some(idx) = corpus.iter().position(|d| d.is_empty()) {
        return Err(LdaError::EmptyDocument(idx));
    }
    let k = cfg.topics;
    let v = vocab_size.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut topic_word = vec![0u32; k * v];
    let mut topic_totals = vec![0u32; k];
    let mut doc_topic: Vec<Vec<u32>> = corpus.iter().map(|_| vec![0u32; k]).collect();
    let mut assignments: Vec<Vec<u16>> = Vec::with_capacity(corpus.len());
    let mut total_tokens = 0u64;

    for (d, doc) in corpus.iter().enumerate() {
        let mut z_doc = Vec::with_capacity(doc.len());
        for &w in doc {
            debug_assert!((w as usize) < v);
            let z = rng.gen_range(0..k);
            topic_word[z * v + w as usize] += 1;
            topic_totals[z] += 1;
            doc_topic[d][z] += 1;
            z_doc.push(z as u16);
            total_tokens += 1;
        }
        assignments.push(z_doc);
    }

    let alpha = cfg.alpha;
    let eta = cfg.eta;
    let eta_v = eta * v as f64;
    let mut weights = vec![0.0f64; k];

    for _sweep in 0..cfg.iterations {
        for (d, doc) in corpus.iter().enumerate() {
            for (pos, &w) in doc.iter().enumerate() {
                let w = w as usize;
                let old = assignments[d][pos] as usize;
                topic_word[old * v + w] -= 1;
                topic_totals[old] -= 1;
                doc_topic[d][old] -= 1;

                let mut total = 0.0;
                for (z, weight) in weights.iter_mut().enumerate() {
                    let val = (doc_topic[d][z] as f64 + alpha)
                        * (topic_word[z * v + w] as f64 + eta)
                        / (topic_totals[z] as f64 + eta_v);
                    *weight = val;
                    total += val;
                }
                let mut target = rng.gen::<f64>() * total;
                let mut new = k - 1;
                for (z, &weight) in weights.iter().enumerate() {
                    target -= weight;
                    if target <= 0.0 {
                        new = z;
                        break;
                    }
                }

                topic_word[new * v + w] += 1;
                topic_totals[new] += 1;
                doc_topic[d][new] += 1;
                assignments[d][pos] = new as u16;
            }
        }
        // every sweep conserves the total token count
        debug_assert_eq!(
            topic_totals.iter().map(|&c| c as u64).sum::<u64>(),
            total_tokens
        );
    }

    Ok(TopicModel {
        config: cfg.clone(),
        vocab_size: v,
        topic_word,
        topic_totals,
        doc_topic,
        total_tokens,
    })
}

impl TopicModel {
    pub fn topics(&self) -> usize {
        self.config.topics
    }

    /// Sum of all topic-word counts; equals the training token count.
    pub fn count_sum(&self) -> u64 {
        self.topic_word.iter().map(|&c| c as u64).sum()
    }

    pub fn training_token_count(&self) -> u64 {
        self.total_tokens
    }

    /// Topic-word distribution phi for one topic.
    pub fn topic_word_distribution(&self, topic: usize) -> Vec<f64> {
        let v = self.vocab_size;
        let denom = self.topic_totals[topic] as f64 + self.config.eta * v as f64;
        (0..v)
            .map(|w| (self.topic_word[topic * v + w] as f64 + self.config.eta) / denom)
            .collect()
    }

    /// Topic mixture of a training document from its final counts.
    pub fn training_theta(&self, doc: usize) -> Vec<f64> {
        let counts = &self.doc_topic[doc];
        let len: u32 = counts.iter().sum();
        let denom = len as f64 + self.config.alpha * self.config.topics as f64;
        counts
            .iter()
            .map(|&c| (c as f64 + self.config.alpha) / denom)
            .collect()
    }

    /// Top-`n` token ids of one topic by probability (ties by id).
    pub fn top_words(&self, topic: usize, n: usize) -> Vec<u32> {
        let phi = self.topic_word_distribution(topic);
        let mut ids: Vec<u32> = (0..self.vocab_size as u32).collect();
        ids.sort_by(|&a, &b| {
            phi[b as usize]
                .partial_cmp(&phi[a as usize])
                .unwrap()
                .then(a.cmp(&b))
        });
        ids.truncate(n);
        ids
    }
}

/// Fold a document into a trained model: Gibbs over the document's own
/// assignments with global counts frozen, theta averaged after burn-in.
/// Deterministic: the sampling stream is derived from the model seed and the
/// document content.
pub fn infer_topic_mixture(model: &TopicModel, document: &[u32]) -> InferredMixture {
    let k = model.config.topics;
    if document.is_empty() {
        return InferredMixture {
            theta: vec![1.0 / k as f64; k],
            fallback: true,
        };
    }
    let mut seed_bytes: Vec<u8> = Vec::with_capacity(8 + document.len() * 4);
    seed_bytes.extend_from_slice(&model.config.seed.to_le_bytes());
    for &w in document {
        seed_bytes.extend_from_slice(&w.to_le_bytes());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(fnv1a(&seed_bytes));

    let v = model.vocab_size;
    let alpha = model.config.alpha;
    let eta = model.config.eta;
    let eta_v = eta * v as f64;

    let mut doc_counts = vec![0u32; k];
    let mut z: Vec<usize> = document
        .iter()
        .map(|_| {
            let t = rng.gen_range(0..k);
            doc_counts[t] += 1;
            t
        })
        .collect();

    let mut theta_acc = vec![0.0f64; k];
    let mut weights = vec![0.0f64; k];
    let denom_theta = document.len() as f64 + alpha * k as f64;

    for sweep in 0..INFER_BURN_IN + INFER_AVERAGE_SWEEPS {
        for (pos, &w) in document.iter().enumerate() {
            let w = w as usize;
            let old = z[pos];
            doc_counts[old] -= 1;
            let mut total = 0.0;
            for (t, weight) in weights.iter_mut().enumerate() {
                let val = (doc_counts[t] as f64 + alpha)
                    * (model.topic_word[t * v + w] as f64 + eta)
                    / (model.topic_totals[t] as f64 + eta_v);
                *weight = val;
                total += val;
            }
            let mut target = rng.gen::<f64>() * total;
            let mut new = k - 1;
            for (t, &weight) in weights.iter().enumerate() {
                target -= weight;
                if target <= 0.0 {
                    new = t;
                    break;
                }
            }
            doc_counts[new] += 1;
            z[pos] = new;
        }
        if sweep >= INFER_BURN_IN {
            for (t, acc) in theta_acc.iter_mut().enumerate() {
                *acc += (doc_counts[t] as f64 + alpha) / denom_theta;
            }
        }
    }

    let total: f64 = theta_acc.iter().sum();
    InferredMixture {
        theta: theta_acc.iter().map(|a| a / total).collect(),
        fallback: false,
    }
}

/// Mean of per-query mixtures: the user's topic profile.
pub fn user_topic_profile(
    model: &TopicModel,
    queries: &[Vec<u32>],
) -> Result<Vec<f64>, LdaError> {
    if queries.is_empty() {
        return Err(LdaError::EmptyCorpus);
    }
    let k = model.config.topics;
    let mut profile = vec![0.0; k];
    for q in queries {
        let mix = infer_topic_mixture(model, q);
        for (p, t) in profile.iter_mut().zip(&mix.theta) {
            *p += t;
        }
    }
    for p in profile.iter_mut() {
        *p /= queries.len() as f64;
    }
    Ok(profile)
}

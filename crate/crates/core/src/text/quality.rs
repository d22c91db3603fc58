//! Topic quality: NPMI coherence and top-word diversity.

use super::lda::TopicModel;

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct TopicQuality {
    /// Mean pairwise NPMI over each topic's top-10 words, averaged over topics.
    pub coherence: f64,
    pub per_topic_coherence: Vec<f64>,
    /// Fraction of unique words across all topics' top-25 lists.
    pub diversity: f64,
}

const COHERENCE_TOP_WORDS: usize = 10;
const DIVERSITY_TOP_WORDS: usize = 25;

/// Document-level co-occurrence NPMI with add-one smoothing:
/// `P(w) = (df(w)+1)/(D+1)`, `P(w1,w2) = (df(w1,w2)+1)/(D+1)`.
pub fn npmi(df_a: usize, df_b: usize, df_joint: usize, docs: usize) -> f64 {
    let d = (docs + 1) as f64;
    let pa = (df_a + 1) as f64 / d;
    let pb = (df_b + 1) as f64 / d;
    let pab = (df_joint + 1) as f64 / d;
    let denom = -pab.ln();
    if denom == 0.0 {
        // joint probability 1: pair co-occurs everywhere
        return 1.0;
    }
    ((pab / (pa * pb)).ln() / denom).clamp(-1.0, 1.0)
}

/// Coherence and diversity of a trained model against a reference corpus
/// (used only for document co-occurrence counts).
pub fn topic_quality(model: &TopicModel, corpus: &[Vec<u32>]) -> TopicQuality {
    let docs = corpus.len();
    let v = model.vocab_size;
    let mut df = vec![0usize; v];
    let doc_sets: Vec<Vec<u32>> = corpus
        .iter()
        .map(|doc| {
            let mut s = doc.clone();
            s.sort_unstable();
            s.dedup();
            for &w in &s {
                df[w as usize] += 1;
            }
            s
        })
        .collect();
    let joint = |a: u32, b: u32| {
        doc_sets
            .iter()
            .filter(|s| s.binary_search(&a).is_ok() && s.binary_search(&b).is_ok())
            .count()
    };

    let k = model.topics();
    let mut per_topic = Vec::with_capacity(k);
    for topic in 0..k {
        let top = model.top_words(topic, COHERENCE_TOP_WORDS);
        let mut total = 0.0;
        let mut pairs = 0usize;
        for i in 0..top.len() {
            for j in i + 1..top.len() {
                total += npmi(
                    df[top[i] as usize],
                    df[top[j] as usize],
                    joint(top[i], top[j]),
                    docs,
                );
                pairs += 1;
            }
        }
        per_topic.push(if pairs > 0 { total / pairs as f64 } else { 0.0 });
    }
    let coherence = per_topic.iter().sum::<f64>() / k as f64;

    let mut all_top: Vec<u32> = Vec::new();
    let mut total_listed = 0usize;
    for topic in 0..k {
        let top = model.top_words(topic, DIVERSITY_TOP_WORDS);
        total_listed += top.len();
        all_top.extend(top);
    }
    all_top.sort_unstable();
    all_top.dedup();
    let diversity = all_top.len() as f64 / total_listed.max(1) as f64;

    TopicQuality {
        coherence,
        per_topic_coherence: per_topic,
        diversity,
    }
}

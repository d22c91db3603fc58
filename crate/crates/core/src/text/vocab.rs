//! Tokenization and topic vocabulary.
//!
//! Unicode word segmentation throughout; topics fold case, style analysis
//! keeps it. Tokens below the document-frequency floor are excluded from the
//! topic vocabulary to keep the Gibbs sampler's tables small.

use std::collections::HashMap;

use unicode_segmentation::UnicodeSegmentation;

/// Case-preserving word tokens.
pub fn tokenize(text: &str) -> Vec<&str> {
    text.unicode_words().collect()
}

/// Case-folded tokens for topic modeling.
pub fn tokenize_folded(text: &str) -> Vec<String> {
    text.unicode_words().map(|w| w.to_lowercase()).collect()
}

/// Token-to-id table with document frequencies.
#[derive(Debug, Clone)]
pub struct Vocabulary {
    tokens: Vec<String>,
    ids: HashMap<String, u32>,
    pub doc_frequency: Vec<u32>,
    pub min_df: u32,
}

impl Vocabulary {
    /// Build from case-folded documents, keeping tokens that appear in at
    /// least `min_df` distinct documents. Ids are dense, assigned in first
    /// appearance order over the corpus.
    pub fn build(documents: &[Vec<String>], min_df: u32) -> Self {
        let mut df: HashMap<&str, u32> = HashMap::new();
        let mut first_seen: Vec<&str> = Vec::new();
        for doc in documents {
            let mut seen = std::collections::HashSet::new();
            for token in doc {
                if seen.insert(token.as_str()) {
                    let e = df.entry(token.as_str()).or_insert(0);
                    if *e == 0 {
                        first_seen.push(token.as_str());
                    }
                    *e += 1;
                }
            }
        }
        let mut tokens = Vec::new();
        let mut ids = HashMap::new();
        let mut doc_frequency = Vec::new();
        for token in first_seen {
            let f = df[token];
            if f >= min_df {
                ids.insert(token.to_string(), tokens.len() as u32);
                tokens.push(token.to_string());
                doc_frequency.push(f);
            }
        }
        Vocabulary {
            tokens,
            ids,
            doc_frequency,
            min_df,
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.ids.get(token).copied()
    }

    pub fn token(&self, id: u32) -> &str {
        &self.tokens[id as usize]
    }

    /// Map a folded document onto vocabulary ids, dropping OOV tokens.
    pub fn encode(&self, document: &[String]) -> Vec<u32> {
        document.iter().filter_map(|t| self.id(t)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unicode_words_drop_punctuation() {
        assert_eq!(tokenize("Please write a short poem."), vec![
            "Please", "write", "a", "short", "poem"
        ]);
        // inner apostrophe stays in the token
        assert_eq!(tokenize("don't stop"), vec!["don't", "stop"]);
    }

    #[test]
    fn folding_lowercases() {
        assert_eq!(tokenize_folded("Hello WORLD"), vec!["hello", "world"]);
    }

    #[test]
    fn min_df_prunes_rare_tokens() {
        let docs = vec![
            vec!["apple".to_string(), "banana".to_string()],
            vec!["apple".to_string(), "cherry".to_string()],
        ];
        let vocab = Vocabulary::build(&docs, 2);
        assert_eq!(vocab.len(), 1);
        assert_eq!(vocab.token(0), "apple");
        assert_eq!(vocab.doc_frequency[0], 2);
        assert_eq!(vocab.encode(&docs[0]), vec![0]);
    }

    #[test]
    fn df_counts_documents_not_occurrences() {
        let docs = vec![vec!["x".to_string(), "x".to_string(), "x".to_string()]];
        let vocab = Vocabulary::build(&docs, 1);
        assert_eq!(vocab.doc_frequency[0], 1);
    }

    #[test]
    fn ids_are_dense_and_stable() {
        let docs = vec![
            vec!["b".to_string(), "a".to_string()],
            vec!["a".to_string(), "b".to_string(), "c".to_string()],
        ];
        let vocab = Vocabulary::build(&docs, 2);
        // first-appearance order: b then a; c pruned (df 1)
        assert_eq!(vocab.token(0), "b");
        assert_eq!(vocab.token(1), "a");
        assert_eq!(vocab.id("c"), None);
    }
}

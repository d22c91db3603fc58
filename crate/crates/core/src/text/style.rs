//! Deterministic stylometric features.
//!
//! Sixteen interpretable per-query measurements (punctuation habits,
//! capitalization, function-word rates, sentence shape), each normalized
//! into [0,1]. A pure function of the text: identical input gives identical
//! output on every platform, which makes all downstream tests exact.

use super::vocab::tokenize;

pub const STYLE_DIM: usize = 16;

pub const STYLE_FEATURE_NAMES: [&str; STYLE_DIM] = [
    "sentence_completeness",
    "comma_density",
    "period_density",
    "question_rate",
    "exclamation_rate",
    "capitalization_correctness",
    "lowercase_start_rate",
    "article_rate",
    "first_person_rate",
    "second_person_rate",
    "digit_token_rate",
    "mean_token_length",
    "type_token_ratio",
    "mean_sentence_length",
    "contraction_rate",
    "politeness_rate",
];

/// Fixed-order style feature vector for one query.
#[derive(Debug, Clone, PartialEq)]
pub struct StyleVector {
    pub values: [f64; STYLE_DIM],
    /// Set when the text has no word tokens; values are all zero then.
    pub empty: bool,
}

const FIRST_PERSON: [&str; 10] = [
    "i", "me", "my", "mine", "myself", "we", "us", "our", "ours", "ourselves",
];
const SECOND_PERSON: [&str; 5] = ["you", "your", "yours", "yourself", "yourselves"];
const ARTICLES: [&str; 3] = ["a", "an", "the"];

struct SentenceUnit {
    token_count: usize,
    terminated: bool,
    first_char: Option<char>,
}

/// Split on runs of terminal punctuation; trailing text without a
/// terminator is an incomplete sentence unit.
fn sentence_units(text: &str) -> Vec<SentenceUnit> {
    let mut units = Vec::new();
    let mut buf = String::new();
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        if matches!(c, '.' | '!' | '?') {
            while matches!(chars.peek(), Some('.') | Some('!') | Some('?')) {
                chars.next();
            }
            push_unit(&mut units, &buf, true);
            buf.clear();
        } else {
            buf.push(c);
        }
    }
    push_unit(&mut units, &buf, false);
    units
}

fn push_unit(units: &mut Vec<SentenceUnit>, buf: &str, terminated: bool) {
    let tokens = tokenize(buf);
    if tokens.is_empty() {
        return;
    }
    units.push(SentenceUnit {
        token_count: tokens.len(),
        terminated,
        first_char: tokens[0].chars().next(),
    });
}

fn clip01(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

/// Extract the 16-dimensional style vector from raw text.
pub fn extract_style_features(text: &str) -> StyleVector {
    let tokens = tokenize(text);
    if tokens.is_empty() {
        return StyleVector {
            values: [0.0; STYLE_DIM],
            empty: true,
        };
    }
    let n = tokens.len() as f64;
    let folded: Vec<String> = tokens.iter().map(|t| t.to_lowercase()).collect();

    let units = sentence_units(text);
    let n_sentences = units.len().max(1) as f64;
    let completed = units.iter().filter(|u| u.terminated).count() as f64;
    let upper_starts = units
        .iter()
        .filter(|u| u.first_char.map(|c| c.is_uppercase()).unwrap_or(false))
        .count() as f64;
    let lower_starts = units
        .iter()
        .filter(|u| u.first_char.map(|c| c.is_lowercase()).unwrap_or(false))
        .count() as f64;

    let count_chars = |c: char| text.chars().filter(|&x| x == c).count() as f64;
    let rate_in = |set: &[&str]| {
        folded.iter().filter(|t| set.contains(&t.as_str())).count() as f64 / n
    };

    let mut politeness = folded
        .iter()
        .filter(|t| t.as_str() == "please" || t.as_str() == "thanks")
        .count() as f64;
    politeness += folded
        .windows(2)
        .filter(|w| w[0] == "could" && w[1] == "you")
        .count() as f64;

    let unique = {
        let mut sorted = folded.clone();
        sorted.sort_unstable();
        sorted.dedup();
        sorted.len() as f64
    };
    let mean_token_len =
        tokens.iter().map(|t| t.chars().count()).sum::<usize>() as f64 / n;
    let mean_sentence_len =
        units.iter().map(|u| u.token_count).sum::<usize>() as f64 / n_sentences;

    let values = [
        completed / n_sentences,
        clip01(count_chars(',') / n),
        clip01(count_chars('.') / n),
        clip01(count_chars('?') / n),
        clip01(count_chars('!') / n),
        upper_starts / n_sentences,
        lower_starts / n_sentences,
        rate_in(&ARTICLES),
        rate_in(&FIRST_PERSON),
        rate_in(&SECOND_PERSON),
        folded.iter().filter(|t| t.chars().any(|c| c.is_ascii_digit())).count() as f64 / n,
        clip01(mean_token_len / 12.0),
        unique / n,
        clip01(mean_sentence_len / 40.0),
        folded.iter().filter(|t| t.contains('\'') || t.contains('\u{2019}')).count() as f64 / n,
        clip01(politeness / n),
    ];
    StyleVector {
        values,
        empty: false,
    }
}

/// Mean style vector over a user's queries, skipping none (empty queries
/// contribute zeros, mirroring the per-query vectors).
pub fn mean_style_vector(queries: &[StyleVector]) -> Option<[f64; STYLE_DIM]> {
    if queries.is_empty() {
        return None;
    }
    let mut mean = [0.0; STYLE_DIM];
    for q in queries {
        for (m, v) in mean.iter_mut().zip(&q.values) {
            *m += v;
        }
    }
    for m in mean.iter_mut() {
        *m /= queries.len() as f64;
    }
    Some(mean)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn feature(v: &StyleVector, name: &str) -> f64 {
        let idx = STYLE_FEATURE_NAMES.iter().position(|&n| n == name).unwrap();
        v.values[idx]
    }

    #[test]
    fn polite_complete_sentence() {
        let v = extract_style_features("Please write a short poem.");
        assert!(!v.empty);
        assert_eq!(feature(&v, "sentence_completeness"), 1.0);
        assert_eq!(feature(&v, "article_rate"), 1.0 / 5.0);
        assert!(feature(&v, "politeness_rate") > 0.0);
        assert_eq!(feature(&v, "capitalization_correctness"), 1.0);
        assert_eq!(feature(&v, "period_density"), 1.0 / 5.0);
        // mean token length (6+5+1+5+4)/5 = 4.2, normalized by 12
        assert!((feature(&v, "mean_token_length") - 4.2 / 12.0).abs() < 1e-12);
        assert_eq!(feature(&v, "type_token_ratio"), 1.0);
        // 5 tokens / 1 sentence, normalized by 40
        assert!((feature(&v, "mean_sentence_length") - 5.0 / 40.0).abs() < 1e-12);
    }

    #[test]
    fn empty_text_is_flagged_zero() {
        for text in ["", "   ", "???"] {
            let v = extract_style_features(text);
            assert!(v.empty, "{text:?}");
            assert_eq!(v.values, [0.0; STYLE_DIM]);
        }
    }

    #[test]
    fn fragment_query() {
        let v = extract_style_features("what is rust");
        assert_eq!(feature(&v, "capitalization_correctness"), 0.0);
        assert_eq!(feature(&v, "sentence_completeness"), 0.0);
        assert_eq!(feature(&v, "lowercase_start_rate"), 1.0);
        assert_eq!(feature(&v, "period_density"), 0.0);
    }

    #[test]
    fn question_and_pronoun_rates() {
        let v = extract_style_features("Could you tell me why I can't do this?");
        assert!(feature(&v, "question_rate") > 0.0);
        assert!(feature(&v, "politeness_rate") > 0.0); // "could you"
        // "me", "I" of 9 tokens; "can't" is one token
        assert!((feature(&v, "first_person_rate") - 2.0 / 9.0).abs() < 1e-12);
        assert!((feature(&v, "second_person_rate") - 1.0 / 9.0).abs() < 1e-12);
        assert!((feature(&v, "contraction_rate") - 1.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn digits_and_multiple_sentences() {
        let v = extract_style_features("I have 2 cats. they are great!");
        assert!((feature(&v, "digit_token_rate") - 1.0 / 7.0).abs() < 1e-12);
        assert_eq!(feature(&v, "sentence_completeness"), 1.0);
        // "I have 2 cats" upper start, "they are great" lower start
        assert_eq!(feature(&v, "capitalization_correctness"), 0.5);
        assert_eq!(feature(&v, "lowercase_start_rate"), 0.5);
    }

    #[test]
    fn rates_are_clipped_to_unit_interval() {
        let v = extract_style_features("a,,,,,,,,, b!!!!!!!!!");
        for (name, value) in STYLE_FEATURE_NAMES.iter().zip(v.values) {
            assert!((0.0..=1.0).contains(&value), "{name}={value}");
        }
    }

    #[test]
    fn pure_function_of_text() {
        let text = "Hello there... could you PLEASE explain quantum computing? thanks!";
        assert_eq!(extract_style_features(text), extract_style_features(text));
    }

    #[test]
    fn mean_vector_averages() {
        let a = extract_style_features("Hi there.");
        let b = extract_style_features("what");
        let mean = mean_style_vector(&[a.clone(), b.clone()]).unwrap();
        for i in 0..STYLE_DIM {
            assert!((mean[i] - (a.values[i] + b.values[i]) / 2.0).abs() < 1e-12);
        }
        assert!(mean_style_vector(&[]).is_none());
    }
}

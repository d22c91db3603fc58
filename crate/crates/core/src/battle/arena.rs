//! Adapter for the public crowd-sourced comparison dataset row schema.
//!
//! Rows are JSON objects with `judge` (the voting user), `model_a`,
//! `model_b`, `winner` and two conversation arrays; the first user turn of
//! `conversation_a` is the prompt. Prompt text is taken verbatim: no
//! lowercasing, punctuation and structure retained.

use std::io::{BufRead, BufReader, Read};

use serde_json::Value;

use super::{BattleLog, IngestError, Outcome};

/// Adapter options. `language` keeps only rows whose `language` column
/// equals the given value (the dataset tags each row); `None` keeps all.
#[derive(Debug, Clone, Default)]
pub struct ArenaOptions {
    pub language: Option<String>,
}

fn require<'v>(row: &'v Value, name: &str, line: usize) -> Result<&'v Value, IngestError> {
    row.get(name).ok_or_else(|| IngestError::MissingField {
        line,
        name: name.to_string(),
    })
}

fn require_str<'v>(row: &'v Value, name: &str, line: usize) -> Result<&'v str, IngestError> {
    require(row, name, line)?
        .as_str()
        .ok_or_else(|| IngestError::MissingField {
            line,
            name: name.to_string(),
        })
}

fn first_user_turn(conversation: &Value) -> Option<&str> {
    conversation.as_array()?.iter().find_map(|turn| {
        let role = turn.get("role")?.as_str()?;
        if role == "user" {
            turn.get("content")?.as_str()
        } else {
            None
        }
    })
}

/// Parse a dataset row stream (one JSON object per line) into a canonical
/// [`BattleLog`].
pub fn adapt_arena_schema<R: Read>(
    reader: R,
    options: &ArenaOptions,
) -> Result<BattleLog, IngestError> {
    let mut log = BattleLog::default();
    let buf = BufReader::new(reader);
    for (idx, line) in buf.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| IngestError::MalformedLine(line_no, e.to_string()))?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let row: Value = serde_json::from_str(trimmed)
            .map_err(|e| IngestError::MalformedLine(line_no, e.to_string()))?;

        if let Some(wanted) = &options.language {
            let lang = row.get("language").and_then(Value::as_str).unwrap_or("");
            if lang != wanted {
                continue;
            }
        }

        let judge = require_str(&row, "judge", line_no)?;
        let model_a = require_str(&row, "model_a", line_no)?;
        let model_b = require_str(&row, "model_b", line_no)?;
        let winner = require_str(&row, "winner", line_no)?;
        let outcome = match winner {
            "model_a" => Outcome::AWins,
            "model_b" => Outcome::BWins,
            "tie" => Outcome::Tie,
            "tie (bothbad)" => Outcome::BothBad,
            other => {
                return Err(IngestError::UnknownWinnerLabel {
                    line: line_no,
                    value: other.to_string(),
                })
            }
        };
        let conversation = require(&row, "conversation_a", line_no)?;
        let prompt = first_user_turn(conversation).unwrap_or("").to_string();
        log.push(line_no, judge, model_a, model_b, outcome, prompt)?;
    }
    if log.records.is_empty() {
        return Err(IngestError::EmptyInput);
    }
    Ok(log)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(winner: &str) -> String {
        serde_json::json!({
            "judge": "arena_user_1",
            "model_a": "alpha",
            "model_b": "beta",
            "winner": winner,
            "language": "English",
            "conversation_a": [
                {"role": "user", "content": "What is Rust?"},
                {"role": "assistant", "content": "a language"},
                {"role": "user", "content": "second turn ignored"},
            ],
            "conversation_b": [
                {"role": "user", "content": "What is Rust?"},
                {"role": "assistant", "content": "a crab"},
            ],
        })
        .to_string()
    }

    #[test]
    fn winner_labels_map() {
        for (label, expected) in [
            ("model_a", Outcome::AWins),
            ("model_b", Outcome::BWins),
            ("tie", Outcome::Tie),
            ("tie (bothbad)", Outcome::BothBad),
        ] {
            let log = adapt_arena_schema(row(label).as_bytes(), &ArenaOptions::default()).unwrap();
            assert_eq!(log.records[0].outcome, expected);
        }
    }

    #[test]
    fn prompt_is_first_user_turn_only() {
        let log = adapt_arena_schema(row("tie").as_bytes(), &ArenaOptions::default()).unwrap();
        assert_eq!(log.records[0].prompt, "What is Rust?");
    }

    #[test]
    fn unknown_winner_label_rejected() {
        match adapt_arena_schema(row("model_c").as_bytes(), &ArenaOptions::default()).unwrap_err()
        {
            IngestError::UnknownWinnerLabel { line: 1, value } => assert_eq!(value, "model_c"),
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn missing_judge_rejected() {
        let mut v: Value = serde_json::from_str(&row("tie")).unwrap();
        v.as_object_mut().unwrap().remove("judge");
        match adapt_arena_schema(v.to_string().as_bytes(), &ArenaOptions::default()).unwrap_err() {
            IngestError::MissingField { line: 1, name } => assert_eq!(name, "judge"),
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn language_filter_drops_rows() {
        let mut v: Value = serde_json::from_str(&row("tie")).unwrap();
        v["language"] = Value::String("German".to_string());
        let two_rows = format!("{}\n{}", row("tie"), v);
        let options = ArenaOptions {
            language: Some("English".to_string()),
        };
        let log = adapt_arena_schema(two_rows.as_bytes(), &options).unwrap();
        assert_eq!(log.records.len(), 1);
    }

    #[test]
    fn missing_user_turn_flags_text_missing() {
        let mut v: Value = serde_json::from_str(&row("tie")).unwrap();
        v["conversation_a"] = serde_json::json!([{"role": "assistant", "content": "hi"}]);
        let log =
            adapt_arena_schema(v.to_string().as_bytes(), &ArenaOptions::default()).unwrap();
        assert!(log.records[0].text_missing);
        assert_eq!(log.records[0].prompt, "");
    }
}

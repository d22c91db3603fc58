//! Canonical line-delimited battle format.
//!
//! One JSON object per line with fields `user_id`, `model_a`, `model_b`,
//! `outcome` (`a_wins` | `b_wins` | `tie` | `both_bad`) and `prompt`. Blank
//! lines and lines starting with `#` are skipped.

use std::io::{BufRead, BufReader, Read, Write};

use serde::{Deserialize, Serialize};

use super::{BattleLog, IngestError, Outcome};

#[derive(Serialize, Deserialize)]
struct CanonicalLine<'a> {
    user_id: &'a str,
    model_a: &'a str,
    model_b: &'a str,
    outcome: Outcome,
    prompt: &'a str,
}

/// Parse a canonical battle stream into a [`BattleLog`].
pub fn parse_canonical<R: Read>(reader: R) -> Result<BattleLog, IngestError> {
    let mut log = BattleLog::default();
    let buf = BufReader::new(reader);
    for (idx, line) in buf.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| IngestError::MalformedLine(line_no, e.to_string()))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let rec: CanonicalLine = serde_json::from_str(trimmed)
            .map_err(|e| IngestError::MalformedLine(line_no, e.to_string()))?;
        log.push(
            line_no,
            rec.user_id,
            rec.model_a,
            rec.model_b,
            rec.outcome,
            rec.prompt.to_string(),
        )?;
    }
    if log.records.is_empty() {
        return Err(IngestError::EmptyInput);
    }
    Ok(log)
}

/// Write a log back out in the canonical line format.
pub fn serialize_canonical<W: Write>(log: &BattleLog, mut writer: W) -> std::io::Result<()> {
    for r in &log.records {
        let line = CanonicalLine {
            user_id: log.user_name(r.user),
            model_a: log.model_name(r.model_a),
            model_b: log.model_name(r.model_b),
            outcome: r.outcome,
            prompt: &r.prompt,
        };
        serde_json::to_writer(&mut writer, &line)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

//! Pairwise-comparison log ingestion.
//!
//! A [`BattleLog`] is the canonical in-memory form of a preference log: an
//! ordered list of battles plus stable integer ids for every model and user,
//! assigned in first-appearance order. Iteration order always equals source
//! order because ELO replay is order-sensitive.

mod arena;
mod parse;

pub use arena::{adapt_arena_schema, ArenaOptions};
pub use parse::{parse_canonical, serialize_canonical};

use std::collections::HashMap;

use thiserror::Error;

/// Outcome of one battle. `BothBad` is preserved on parse and only collapsed
/// to `Tie` inside the rating engines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    AWins,
    BWins,
    Tie,
    BothBad,
}

/// Dense model id, assigned in first-appearance order within a log.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModelId(pub u32);

/// Dense user id, assigned in first-appearance order within a log.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UserId(pub u32);

/// One pairwise comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct BattleRecord {
    pub user: UserId,
    pub model_a: ModelId,
    pub model_b: ModelId,
    pub outcome: Outcome,
    /// First-turn user query text. May be empty only when `text_missing`.
    pub prompt: String,
    pub text_missing: bool,
    /// Order within the source file; strictly increasing.
    pub sequence_index: u32,
}

/// Canonical in-memory battle log.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BattleLog {
    pub records: Vec<BattleRecord>,
    models: Vec<String>,
    users: Vec<String>,
    model_ids: HashMap<String, ModelId>,
    user_ids: HashMap<String, UserId>,
}

#[derive(Debug, Error, PartialEq)]
pub enum IngestError {
    #[error("line {0}: {1}")]
    MalformedLine(usize, String),
    #[error("line {0}: model_a == model_b")]
    DuplicateSameModels(usize),
    #[error("input contains no records")]
    EmptyInput,
    #[error("line {line}: missing field `{name}`")]
    MissingField { line: usize, name: String },
    #[error("line {line}: unknown winner label `{value}`")]
    UnknownWinnerLabel { line: usize, value: String },
    #[error("no user has at least {0} battles")]
    NoQualifyingUsers(usize),
    #[error("unknown user")]
    UnknownUser,
}

impl BattleLog {
    fn intern_model(&mut self, name: &str) -> ModelId {
        if let Some(&id) = self.model_ids.get(name) {
            return id;
        }
        let id = ModelId(self.models.len() as u32);
        self.models.push(name.to_string());
        self.model_ids.insert(name.to_string(), id);
        id
    }

    fn intern_user(&mut self, name: &str) -> UserId {
        if let Some(&id) = self.user_ids.get(name) {
            return id;
        }
        let id = UserId(self.users.len() as u32);
        self.users.push(name.to_string());
        self.user_ids.insert(name.to_string(), id);
        id
    }

    fn push(
        &mut self,
        line_no: usize,
        user: &str,
        model_a: &str,
        model_b: &str,
        outcome: Outcome,
        prompt: String,
    ) -> Result<(), IngestError> {
        if model_a == model_b {
            return Err(IngestError::DuplicateSameModels(line_no));
        }
        let user = self.intern_user(user);
        let model_a = self.intern_model(model_a);
        let model_b = self.intern_model(model_b);
        let text_missing = prompt.is_empty();
        let sequence_index = self.records.len() as u32;
        self.records.push(BattleRecord {
            user,
            model_a,
            model_b,
            outcome,
            prompt,
            text_missing,
            sequence_index,
        });
        Ok(())
    }

    pub fn model_count(&self) -> usize {
        self.models.len()
    }

    pub fn user_count(&self) -> usize {
        self.users.len()
    }

    pub fn model_name(&self, id: ModelId) -> &str {
        &self.models[id.0 as usize]
    }

    pub fn user_name(&self, id: UserId) -> &str {
        &self.users[id.0 as usize]
    }

    pub fn model_id(&self, name: &str) -> Option<ModelId> {
        self.model_ids.get(name).copied()
    }

    pub fn user_id(&self, name: &str) -> Option<UserId> {
        self.user_ids.get(name).copied()
    }

    pub fn model_names(&self) -> &[String] {
        &self.models
    }

    pub fn user_names(&self) -> &[String] {
        &self.users
    }

    /// Battle count per model, indexed by model id.
    pub fn model_battle_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.models.len()];
        for r in &self.records {
            counts[r.model_a.0 as usize] += 1;
            counts[r.model_b.0 as usize] += 1;
        }
        counts
    }
}

/// Owned record form used to assemble logs programmatically.
#[derive(Debug, Clone, PartialEq)]
pub struct RawBattle {
    pub user_id: String,
    pub model_a: String,
    pub model_b: String,
    pub outcome: Outcome,
    pub prompt: String,
}

impl BattleLog {
    /// Build a log from raw records, interning names in encounter order.
    pub fn build<I: IntoIterator<Item = RawBattle>>(records: I) -> Result<Self, IngestError> {
        let mut log = BattleLog::default();
        for (idx, r) in records.into_iter().enumerate() {
            log.push(idx + 1, &r.user_id, &r.model_a, &r.model_b, r.outcome, r.prompt)?;
        }
        if log.records.is_empty() {
            return Err(IngestError::EmptyInput);
        }
        Ok(log)
    }
}

/// Per-user index over a log: battle counts, unique prompts, record indices.
#[derive(Debug, Clone, PartialEq)]
pub struct UserIndex {
    entries: Vec<UserIndexEntry>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UserIndexEntry {
    pub user: UserId,
    pub battles: usize,
    pub unique_prompts: usize,
    pub record_indices: Vec<usize>,
}

impl UserIndex {
    /// Index every user that appears in `log`, in user-id order.
    pub fn build(log: &BattleLog) -> Self {
        let mut per_user: Vec<Vec<usize>> = vec![Vec::new(); log.user_count()];
        for (idx, r) in log.records.iter().enumerate() {
            per_user[r.user.0 as usize].push(idx);
        }
        let entries = per_user
            .into_iter()
            .enumerate()
            .filter(|(_, indices)| !indices.is_empty())
            .map(|(uid, record_indices)| {
                let mut prompts: Vec<&str> = record_indices
                    .iter()
                    .map(|&i| log.records[i].prompt.as_str())
                    .collect();
                prompts.sort_unstable();
                prompts.dedup();
                UserIndexEntry {
                    user: UserId(uid as u32),
                    battles: record_indices.len(),
                    unique_prompts: prompts.len(),
                    record_indices,
                }
            })
            .collect();
        UserIndex { entries }
    }

    pub fn entries(&self) -> &[UserIndexEntry] {
        &self.entries
    }

    pub fn get(&self, user: UserId) -> Option<&UserIndexEntry> {
        self.entries.iter().find(|e| e.user == user)
    }

    pub fn total_battles(&self) -> usize {
        self.entries.iter().map(|e| e.battles).sum()
    }
}

/// Restrict `log` to users with at least `min_battles` battles.
///
/// Model and user id tables are preserved unchanged so personal and global
/// rating vectors stay aligned over the same model universe; only `records`
/// shrinks. The returned [`UserIndex`] describes the filtered log.
pub fn filter_active_users(
    log: &BattleLog,
    min_battles: usize,
) -> Result<(BattleLog, UserIndex), IngestError> {
    assert!(min_battles >= 1, "min_battles must be >= 1");
    let full_index = UserIndex::build(log);
    let qualifying: Vec<UserId> = full_index
        .entries()
        .iter()
        .filter(|e| e.battles >= min_battles)
        .map(|e| e.user)
        .collect();
    if qualifying.is_empty() {
        return Err(IngestError::NoQualifyingUsers(min_battles));
    }
    let keep: std::collections::HashSet<UserId> = qualifying.into_iter().collect();
    let mut filtered = log.clone();
    filtered.records.retain(|r| keep.contains(&r.user));
    let index = UserIndex::build(&filtered);
    Ok((filtered, index))
}

/// All prompt texts of one user, in source order, duplicates retained.
pub fn collect_user_queries(log: &BattleLog, user: UserId) -> Result<Vec<&str>, IngestError> {
    if (user.0 as usize) >= log.user_count() {
        return Err(IngestError::UnknownUser);
    }
    let queries: Vec<&str> = log
        .records
        .iter()
        .filter(|r| r.user == user)
        .map(|r| r.prompt.as_str())
        .collect();
    if queries.is_empty() {
        return Err(IngestError::UnknownUser);
    }
    Ok(queries)
}

/// Deduplicated view of one user's queries (order of first appearance).
pub fn collect_unique_user_queries(
    log: &BattleLog,
    user: UserId,
) -> Result<Vec<&str>, IngestError> {
    let all = collect_user_queries(log, user)?;
    let mut seen = std::collections::HashSet::new();
    Ok(all.into_iter().filter(|q| seen.insert(*q)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_log() -> BattleLog {
        let text = concat!(
            r#"{"user_id":"u1","model_a":"alpha","model_b":"beta","outcome":"a_wins","prompt":"hello"}"#,
            "\n",
            r#"{"user_id":"u2","model_a":"beta","model_b":"gamma","outcome":"tie","prompt":"hi"}"#,
            "\n",
            r#"{"user_id":"u1","model_a":"alpha","model_b":"gamma","outcome":"b_wins","prompt":"hello"}"#,
            "\n",
        );
        parse_canonical(text.as_bytes()).unwrap()
    }

    #[test]
    fn construction_counts() {
        let log = sample_log();
        assert_eq!(log.records.len(), 3);
        assert_eq!(log.user_count(), 2);
        assert_eq!(log.model_count(), 3);
        assert_eq!(log.model_name(ModelId(0)), "alpha");
        assert_eq!(log.user_name(UserId(1)), "u2");
    }

    #[test]
    fn user_index_counts_sum_to_records() {
        let log = sample_log();
        let index = UserIndex::build(&log);
        assert_eq!(index.total_battles(), log.records.len());
        let u1 = index.get(UserId(0)).unwrap();
        assert_eq!(u1.battles, 2);
        assert_eq!(u1.unique_prompts, 1);
    }

    #[test]
    fn filter_boundary_is_inclusive() {
        let log = sample_log();
        let (filtered, index) = filter_active_users(&log, 2).unwrap();
        assert_eq!(filtered.records.len(), 2);
        assert_eq!(index.entries().len(), 1);
        assert_eq!(index.entries()[0].user, UserId(0));
        // id tables preserved
        assert_eq!(filtered.model_count(), 3);
        assert_eq!(filtered.user_count(), 2);
    }

    #[test]
    fn filter_with_no_qualifying_users() {
        let log = sample_log();
        assert_eq!(
            filter_active_users(&log, 3).unwrap_err(),
            IngestError::NoQualifyingUsers(3)
        );
    }

    #[test]
    fn filter_is_idempotent() {
        let log = sample_log();
        let (once, _) = filter_active_users(&log, 2).unwrap();
        let (twice, _) = filter_active_users(&once, 2).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn queries_keep_duplicates_and_order() {
        let log = sample_log();
        let queries = collect_user_queries(&log, UserId(0)).unwrap();
        assert_eq!(queries, vec!["hello", "hello"]);
        let unique = collect_unique_user_queries(&log, UserId(0)).unwrap();
        assert_eq!(unique, vec!["hello"]);
    }

    #[test]
    fn unknown_user_is_rejected() {
        let log = sample_log();
        assert_eq!(
            collect_user_queries(&log, UserId(99)).unwrap_err(),
            IngestError::UnknownUser
        );
    }
}

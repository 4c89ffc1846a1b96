//! Submission filters: length bounds, a token blocklist, and near-duplicate
//! detection against training data and earlier accepted submissions.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use super::{tokenize, CorpusError, Dataset, Question};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ValidationPolicy {
    pub min_tokens: usize,
    pub max_tokens: usize,
    /// Token-set Jaccard similarity at or above which a question counts as a duplicate.
    pub dup_threshold: f64,
    /// Lowercase tokens that make a question unacceptable.
    pub blocklist: BTreeSet<String>,
}

impl Default for ValidationPolicy {
    fn default() -> Self {
        ValidationPolicy {
            min_tokens: 10,
            max_tokens: 200,
            dup_threshold: 0.8,
            blocklist: BTreeSet::new(),
        }
    }
}

impl ValidationPolicy {
    /// Reads a blocklist file: whitespace-separated words, `#` starts a comment line.
    pub fn load_blocklist(&mut self, path: impl AsRef<Path>) -> Result<(), CorpusError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| CorpusError::io_at(path, e))?;
        for line in text.lines().filter(|l| !l.trim_start().starts_with('#')) {
            self.blocklist.extend(tokenize(line).into_inner());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    TooShort,
    TooLong,
    Vulgar,
    DuplicateOfTraining,
    DuplicateOfSubmission,
}

impl RejectReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            RejectReason::TooShort => "too_short",
            RejectReason::TooLong => "too_long",
            RejectReason::Vulgar => "vulgar",
            RejectReason::DuplicateOfTraining => "duplicate_of_training",
            RejectReason::DuplicateOfSubmission => "duplicate_of_submission",
        }
    }
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", content = "reason", rename_all = "snake_case")]
pub enum ValidationVerdict {
    Accept,
    Reject(RejectReason),
}

impl ValidationVerdict {
    pub fn is_accept(&self) -> bool {
        matches!(self, ValidationVerdict::Accept)
    }
}

/// Jaccard similarity of two token sets. Two empty sets are identical.
pub fn jaccard(a: &BTreeSet<&str>, b: &BTreeSet<&str>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 1.0;
    }
    a.intersection(b).count() as f64 / union as f64
}

fn token_set(q: &Question) -> BTreeSet<&str> {
    q.tokens.iter().map(String::as_str).collect()
}

/// Checks `q` against the training split of `train` with no prior submissions.
pub fn validate_submission(q: &Question, train: &Dataset, policy: &ValidationPolicy) -> ValidationVerdict {
    validate_against(q, train, &[], policy)
}

/// Checks `q` against the training split of `train` and the already accepted
/// `submissions`. Duplicates are only searched among questions with the same answer.
pub fn validate_against(
    q: &Question,
    train: &Dataset,
    submissions: &[Question],
    policy: &ValidationPolicy,
) -> ValidationVerdict {
    let n = q.tokens.len();
    if n < policy.min_tokens {
        return ValidationVerdict::Reject(RejectReason::TooShort);
    }
    if n > policy.max_tokens {
        return ValidationVerdict::Reject(RejectReason::TooLong);
    }
    if q.tokens.iter().any(|t| policy.blocklist.contains(t)) {
        return ValidationVerdict::Reject(RejectReason::Vulgar);
    }
    let mine = token_set(q);
    let same_answer = |other: &&Question| other.answer.canonical_name == q.answer.canonical_name;
    let is_dup = |other: &Question| jaccard(&mine, &token_set(other)) >= policy.dup_threshold;
    if train.train_questions().filter(same_answer).any(is_dup) {
        return ValidationVerdict::Reject(RejectReason::DuplicateOfTraining);
    }
    if submissions.iter().filter(same_answer).any(is_dup) {
        return ValidationVerdict::Reject(RejectReason::DuplicateOfSubmission);
    }
    ValidationVerdict::Accept
}

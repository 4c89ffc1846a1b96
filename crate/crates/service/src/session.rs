use serde::{Deserialize, Serialize};
use std::fmt;

use advqa_core::buzzer::{BuzzResult, Granularity};
use advqa_core::corpus::{AnswerLabel, TokenSequence, ValidationVerdict};
use advqa_core::prediction::{EvidenceMap, GuessList};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionState {
    Open,
    Submitted,
    Abandoned,
}

impl fmt::Display for SessionState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SessionState::Open => "open",
            SessionState::Submitted => "submitted",
            SessionState::Abandoned => "abandoned",
        })
    }
}

/// Which class the evidence explains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvidenceTarget {
    /// The model's current top guess.
    #[default]
    Top,
    /// The session's chosen answer.
    Gold,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalOptions {
    pub granularity: Granularity,
    pub target: EvidenceTarget,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            granularity: Granularity::Sentence,
            target: EvidenceTarget::Top,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DraftFeedback {
    pub tokens: TokenSequence,
    pub guesses: GuessList,
    pub buzz: BuzzResult,
    pub evidence: EvidenceMap,
    /// Class the evidence was computed for, if any.
    pub evidence_class: Option<usize>,
    pub top1_correct: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EditEvent {
    pub seq: u64,
    pub timestamp_ms: u64,
    pub draft_text: String,
    pub options: EvalOptions,
    pub feedback: DraftFeedback,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionInfo {
    pub session_id: String,
    pub author_id: String,
    pub model_id: String,
    pub answer: AnswerLabel,
    pub created_ms: u64,
    pub state: SessionState,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EditSession {
    #[serde(flatten)]
    pub info: SessionInfo,
    pub events: Vec<EditEvent>,
    /// Id of the persisted question once submitted.
    pub submission_id: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub seq: u64,
    pub len: usize,
    pub first: Option<f64>,
}

/// One line of a session's event log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LogRecord {
    Created(SessionInfo),
    Draft(EditEvent),
    SubmissionRejected { timestamp_ms: u64, verdict: ValidationVerdict },
    Submitted { timestamp_ms: u64, submission_id: String },
    Abandoned { timestamp_ms: u64 },
}

impl EditSession {
    pub fn trajectory(&self) -> Vec<TrajectoryPoint> {
        self.events
            .iter()
            .map(|e| TrajectoryPoint {
                seq: e.seq,
                len: e.feedback.tokens.len(),
                first: e.feedback.buzz.first_correct_fraction,
            })
            .collect()
    }

    /// Applies one log record in order; fails on anything a live session could not have produced.
    pub(crate) fn apply(session: &mut Option<EditSession>, record: LogRecord) -> Result<(), String> {
        match (session.as_mut(), record) {
            (None, LogRecord::Created(info)) => {
                *session = Some(EditSession {
                    info,
                    events: Vec::new(),
                    submission_id: None,
                });
            }
            (None, _) => return Err("log does not start with a created record".into()),
            (Some(_), LogRecord::Created(_)) => return Err("duplicate created record".into()),
            (Some(s), rec) if s.info.state != SessionState::Open => {
                return Err(format!("record {rec:?} after session closed"));
            }
            (Some(s), LogRecord::Draft(event)) => {
                let expected = s.events.len() as u64 + 1;
                if event.seq != expected {
                    return Err(format!("event seq {} where {expected} was expected", event.seq));
                }
                s.events.push(event);
            }
            (Some(_), LogRecord::SubmissionRejected { .. }) => {}
            (Some(s), LogRecord::Submitted { submission_id, .. }) => {
                s.info.state = SessionState::Submitted;
                s.submission_id = Some(submission_id);
            }
            (Some(s), LogRecord::Abandoned { .. }) => s.info.state = SessionState::Abandoned,
        }
        Ok(())
    }
}

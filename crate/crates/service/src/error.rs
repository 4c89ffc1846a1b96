use advqa_core::buzzer::BuzzError;

use crate::session::SessionState;

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("no session `{0}`")]
    UnknownSession(String),
    #[error("no model `{0}`")]
    UnknownModel(String),
    #[error("answer `{answer}` is not in the vocabulary of model `{model}`")]
    UnknownAnswer { model: String, answer: String },
    #[error("session `{id}` is {state}")]
    SessionClosed { id: String, state: SessionState },
    #[error("draft has no tokens")]
    EmptyDraft,
    #[error("session `{0}` has no drafts to submit")]
    NoDrafts(String),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error(transparent)]
    Model(#[from] BuzzError),
    #[error("storage error at {path}: {message}")]
    Store { path: String, message: String },
}

impl ServiceError {
    /// Stable machine-readable code sent to clients.
    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::UnknownSession(_) => "unknown_session",
            ServiceError::UnknownModel(_) => "unknown_model",
            ServiceError::UnknownAnswer { .. } => "unknown_answer",
            ServiceError::SessionClosed { .. } => "session_closed",
            ServiceError::EmptyDraft => "empty_draft",
            ServiceError::NoDrafts(_) => "no_drafts",
            ServiceError::InvalidRequest(_) => "invalid_request",
            ServiceError::Model(_) => "model_error",
            ServiceError::Store { .. } => "storage_error",
        }
    }

    pub fn status(&self) -> u16 {
        match self {
            ServiceError::UnknownSession(_) | ServiceError::UnknownModel(_) => 404,
            ServiceError::UnknownAnswer { .. } | ServiceError::EmptyDraft | ServiceError::InvalidRequest(_) => 400,
            ServiceError::SessionClosed { .. } | ServiceError::NoDrafts(_) => 409,
            ServiceError::Model(_) | ServiceError::Store { .. } => 500,
        }
    }

    pub(crate) fn store(path: &std::path::Path, err: impl std::fmt::Display) -> Self {
        ServiceError::Store {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }
}

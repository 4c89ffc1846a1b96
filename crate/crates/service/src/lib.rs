//! Live adversarial-writing backend: authoring sessions against a fixed QA
//! model, per-draft feedback, append-only edit logs and validated submissions,
//! exposed over a small JSON HTTP API.

pub mod error;
pub mod http;
pub mod service;
pub mod session;
pub mod store;

pub use error::ServiceError;
pub use http::{router, serve};
pub use service::{draft_feedback, ModelSummary, Service, FEEDBACK_K};
pub use session::{
    DraftFeedback, EditEvent, EditSession, EvalOptions, EvidenceTarget, LogRecord, SessionInfo, SessionState,
    TrajectoryPoint,
};
pub use store::{IndexEntry, Loaded, SessionStore};

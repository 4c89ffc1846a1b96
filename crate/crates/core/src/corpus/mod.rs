//! Question data model, tokenization, dataset ingestion and submission validation.

mod dataset;
mod question;
pub mod synth;
mod tokenize;
mod validate;

use std::path::Path;

pub use dataset::{load_dataset, Dataset, DatasetFormat, QuestionRecord, Split};
pub use question::{AnswerLabel, Category, ParseEnumError, PhenomenonTag, Question, Source};
pub use tokenize::{tokenize, TokenSequence};
pub use validate::{
    jaccard, validate_against, validate_submission, RejectReason, ValidationPolicy, ValidationVerdict,
};

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: duplicate question id `{id}`")]
    DuplicateId { line: usize, id: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Stream(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CorpusError {
    pub(crate) fn io_at(path: &Path, source: std::io::Error) -> Self {
        CorpusError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

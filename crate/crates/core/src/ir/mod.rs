//! Retrieval QA model: a BM25 inverted index over one document per answer,
//! with per-token match highlighting.

mod analyzer;
mod index;
mod io;

use std::path::Path;

pub use analyzer::{Analyzer, AnalyzerOptions};
pub use index::{bm25_idf, DocEntry, IndexOptions, InvertedIndex, Posting};
pub use io::{IndexFileFormat, INDEX_FORMAT_VERSION};

#[derive(Debug, thiserror::Error)]
pub enum IrError {
    #[error("no training questions to index")]
    NoTrainingData,
    #[error("answer class {0} is not in the index")]
    UnknownAnswer(usize),
    #[error("malformed index file: {0}")]
    Format(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl IrError {
    fn io_at(path: &Path, source: std::io::Error) -> Self {
        IrError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

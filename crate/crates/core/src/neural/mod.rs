//! Neural QA classifiers over frozen word vectors: a deep averaging network
//! and a (optionally bidirectional) GRU, trained with Adam in `f64`, plus
//! gradient and leave-one-out saliency.

mod classifier;
mod embedding;
mod encoder;
mod io;
mod layout;
mod linalg;
mod saliency;
mod train;

use std::path::Path;

pub use classifier::{Arch, Classifier, Gradients};
pub use embedding::EmbeddingTable;
pub use io::CLASSIFIER_FORMAT_VERSION;
pub use layout::{Layout, Segment};
pub use linalg::softmax;
pub use saliency::{
    saliency_gradient, saliency_leave_one_out, saliency_leave_one_out_scaled, LeaveOneOutScale, LogitModel,
    SaliencyMethod, SaliencyResult,
};
pub use train::{train, TrainConfig, TrainReport};

#[derive(Debug, thiserror::Error)]
pub enum NeuralError {
    #[error("need at least 2 classes, found {0}")]
    TooFewClasses(usize),
    #[error("class `{0}` has no training questions")]
    EmptyClass(String),
    #[error("input question is empty")]
    EmptyInput,
    #[error("leave-one-out needs at least 2 tokens")]
    TooShortForRemoval,
    #[error("target class {target} out of range for {num_classes} classes")]
    TargetOutOfRange { target: usize, num_classes: usize },
    #[error("vector dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("non-finite loss at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize },
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
    #[error("malformed model file: {0}")]
    Format(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Stream(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl NeuralError {
    fn io_at(path: &Path, source: std::io::Error) -> Self {
        NeuralError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

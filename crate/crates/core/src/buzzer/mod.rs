//! Incremental prefix evaluation: where a model first answers correctly,
//! accuracy as a function of how much of the question has been read, and
//! full-question accuracy across models and question sets.

mod eval;
mod model;
mod report;

pub use eval::{
    accuracy_curve, accuracy_curve_at, buzz, default_grid, mean_buzz_stats, prefix_len_at, sentence_prefix_lengths,
    transfer_table, AccuracyCurve, BuzzResult, BuzzStats, Granularity, TransferTable,
};
pub use model::{IrModel, ModelFamily, NeuralModel, PrefixLookup, QAModel};
pub use report::{write_curves_csv, write_transfer_csv};

use crate::ir::IrError;
use crate::neural::NeuralError;

#[derive(Debug, thiserror::Error)]
pub enum BuzzError {
    #[error("no questions to evaluate")]
    NoQuestions,
    #[error("no models to evaluate")]
    NoModels,
    #[error("invalid position grid: {0}")]
    InvalidGrid(String),
    #[error(transparent)]
    Ir(#[from] IrError),
    #[error(transparent)]
    Neural(#[from] NeuralError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

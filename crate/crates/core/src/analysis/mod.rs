//! Dataset-difficulty diagnostics: how much of a question already appears
//! in same-answer training questions, how many training examples each answer
//! has, and the significance tests used to compare question sets.

mod entities;
mod overlap;
mod stats;

pub use entities::{extract_entities_approx, NamedEntityApprox};
pub use overlap::{
    answer_frequency, longest_ngram_overlap, ne_overlap, ngram_overlap, overlap_report, write_overlap_csv,
    AnswerFrequency, OverlapReport,
};
pub use stats::{fisher_exact_2x2, ln_gamma, regularized_incomplete_beta, student_t_two_sided, welch_t_test, WelchResult};

#[derive(Debug, thiserror::Error)]
pub enum AnalysisError {
    #[error("question `{id}` has {len} tokens, need at least {n}")]
    TooFewTokens { id: String, len: usize, n: usize },
    #[error("n-gram order must be at least 1")]
    ZeroOrder,
    #[error("no questions to analyze")]
    NoQuestions,
    #[error("contingency table is all zeros")]
    EmptyTable,
    #[error("each sample needs at least 2 values, got {0} and {1}")]
    TooFewSamples(usize, usize),
    #[error("both samples have zero variance")]
    ZeroVariance,
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

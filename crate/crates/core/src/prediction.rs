//! Model outputs shared by every QA model: ranked guesses and per-token evidence.

use serde::{Deserialize, Serialize};

use crate::corpus::AnswerLabel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Guess {
    pub answer: AnswerLabel,
    pub score: f64,
}

/// Top-k answers, best first. Equal scores are ordered by ascending class index.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GuessList(Vec<Guess>);

impl GuessList {
    /// Ranks `labels` by `scores` (parallel slices) and keeps the best `k`.
    pub fn top_k(labels: &[AnswerLabel], scores: &[f64], k: usize) -> GuessList {
        debug_assert_eq!(labels.len(), scores.len());
        let mut order: Vec<usize> = (0..scores.len()).collect();
        order.sort_by(|&a, &b| {
            scores[b]
                .total_cmp(&scores[a])
                .then(labels[a].class_index.cmp(&labels[b].class_index))
        });
        GuessList(
            order
                .into_iter()
                .take(k)
                .map(|i| Guess {
                    answer: labels[i].clone(),
                    score: scores[i],
                })
                .collect(),
        )
    }

    pub fn from_guesses(guesses: Vec<Guess>) -> GuessList {
        GuessList(guesses)
    }

    pub fn top(&self) -> Option<&Guess> {
        self.0.first()
    }

    pub fn guesses(&self) -> &[Guess] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Guess> {
        self.0.iter()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    #[default]
    Raw,
    MaxAbsOne,
}

/// Signed importance weight for each token of a question.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EvidenceMap {
    pub weights: Vec<f64>,
    pub normalization: Normalization,
}

impl EvidenceMap {
    pub fn raw(weights: Vec<f64>) -> Self {
        EvidenceMap {
            weights,
            normalization: Normalization::Raw,
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Rescales so the largest magnitude is 1. All-zero maps are left as is.
    pub fn max_abs_normalized(&self) -> EvidenceMap {
        let peak = self.weights.iter().fold(0.0f64, |m, w| m.max(w.abs()));
        let weights = if peak > 0.0 {
            self.weights.iter().map(|w| w / peak).collect()
        } else {
            self.weights.clone()
        };
        EvidenceMap {
            weights,
            normalization: Normalization::MaxAbsOne,
        }
    }
}

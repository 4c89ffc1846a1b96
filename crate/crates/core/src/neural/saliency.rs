//! Token importance for neural models.
//!
//! Gradient saliency scores token `i` by `∇_{v_i} f_t · v_i`, where `f_t` is
//! the target class's logit and `v_i` the token's embedding. This is the
//! first-order estimate of the logit change when `v_i` is zeroed, so a token
//! with a zero (out-of-vocabulary) vector always scores exactly 0.
//!
//! Leave-one-out scores token `i` by the drop in the target's probability
//! when the token is deleted. [`LeaveOneOutScale::Logit`] measures the drop
//! on the logit instead, which puts it on the same scale as gradient
//! saliency: for a model whose logits are linear in a sum of token vectors
//! the two coincide exactly.

use serde::{Deserialize, Serialize};

use super::classifier::Classifier;
use super::embedding::EmbeddingTable;
use super::linalg::{dot, softmax};
use super::NeuralError;
use crate::corpus::TokenSequence;
use crate::prediction::EvidenceMap;

/// A model with differentiable logits over a sequence of input vectors.
pub trait LogitModel {
    fn num_classes(&self) -> usize;

    fn input_dim(&self) -> usize;

    fn logits(&self, inputs: &[&[f64]]) -> Result<Vec<f64>, NeuralError>;

    /// `∂ logits[target] / ∂ inputs[i]` for every position.
    fn logit_input_gradients(&self, inputs: &[&[f64]], target: usize) -> Result<Vec<Vec<f64>>, NeuralError>;
}

impl LogitModel for Classifier {
    fn num_classes(&self) -> usize {
        Classifier::num_classes(self)
    }

    fn input_dim(&self) -> usize {
        self.dim()
    }

    fn logits(&self, inputs: &[&[f64]]) -> Result<Vec<f64>, NeuralError> {
        self.logits_from_vectors(inputs)
    }

    fn logit_input_gradients(&self, inputs: &[&[f64]], target: usize) -> Result<Vec<Vec<f64>>, NeuralError> {
        Classifier::logit_input_gradients(self, inputs, target)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SaliencyMethod {
    GradientDot,
    LeaveOneOut,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeaveOneOutScale {
    #[default]
    Probability,
    Logit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaliencyResult {
    pub evidence: EvidenceMap,
    pub target: usize,
    pub method: SaliencyMethod,
}

fn check<M: LogitModel>(model: &M, emb: &EmbeddingTable, q: &TokenSequence, target: usize) -> Result<(), NeuralError> {
    if q.is_empty() {
        return Err(NeuralError::EmptyInput);
    }
    if target >= model.num_classes() {
        return Err(NeuralError::TargetOutOfRange {
            target,
            num_classes: model.num_classes(),
        });
    }
    if emb.dim() != model.input_dim() {
        return Err(NeuralError::DimensionMismatch {
            expected: model.input_dim(),
            found: emb.dim(),
        });
    }
    Ok(())
}

pub fn saliency_gradient<M: LogitModel>(
    model: &M,
    emb: &EmbeddingTable,
    q: &TokenSequence,
    target: usize,
) -> Result<SaliencyResult, NeuralError> {
    check(model, emb, q, target)?;
    let inputs = emb.lookup_all(q);
    let grads = model.logit_input_gradients(&inputs, target)?;
    let weights = grads.iter().zip(&inputs).map(|(g, v)| dot(g, v)).collect();
    Ok(SaliencyResult {
        evidence: EvidenceMap::raw(weights),
        target,
        method: SaliencyMethod::GradientDot,
    })
}

/// Probability-drop leave-one-out importance.
pub fn saliency_leave_one_out<M: LogitModel>(
    model: &M,
    emb: &EmbeddingTable,
    q: &TokenSequence,
    target: usize,
) -> Result<SaliencyResult, NeuralError> {
    saliency_leave_one_out_scaled(model, emb, q, target, LeaveOneOutScale::Probability)
}

pub fn saliency_leave_one_out_scaled<M: LogitModel>(
    model: &M,
    emb: &EmbeddingTable,
    q: &TokenSequence,
    target: usize,
    scale: LeaveOneOutScale,
) -> Result<SaliencyResult, NeuralError> {
    check(model, emb, q, target)?;
    if q.len() < 2 {
        return Err(NeuralError::TooShortForRemoval);
    }
    let inputs = emb.lookup_all(q);
    let measure = |xs: &[&[f64]]| -> Result<f64, NeuralError> {
        let logits = model.logits(xs)?;
        Ok(match scale {
            LeaveOneOutScale::Probability => softmax(&logits)[target],
            LeaveOneOutScale::Logit => logits[target],
        })
    };
    let full = measure(&inputs)?;
    let weights = (0..inputs.len())
        .map(|i| {
            let mut reduced = inputs.clone();
            reduced.remove(i);
            Ok(full - measure(&reduced)?)
        })
        .collect::<Result<Vec<f64>, NeuralError>>()?;
    Ok(SaliencyResult {
        evidence: EvidenceMap::raw(weights),
        target,
        method: SaliencyMethod::LeaveOneOut,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::AnswerLabel;
    use crate::neural::Arch;

    fn model(arch: Arch) -> (Classifier, EmbeddingTable) {
        let labels = (0..3).map(|i| AnswerLabel::new(format!("C{i}"), i)).collect();
        let clf = Classifier::init(arch, 5, 4, labels, 21).unwrap();
        let emb = EmbeddingTable::random(["a", "b", "c"], 5, 4);
        (clf, emb)
    }

    #[test]
    fn oov_token_gets_exactly_zero() {
        for arch in [Arch::Dan, Arch::Gru { bidirectional: true }] {
            let (clf, emb) = model(arch);
            let q = TokenSequence::from(&["a", "unknown", "b"][..]);
            let s = saliency_gradient(&clf, &emb, &q, 1).unwrap();
            assert_eq!(s.evidence.weights[1], 0.0);
            assert_eq!(s.evidence.len(), 3);
            assert_eq!(s.method, SaliencyMethod::GradientDot);
        }
    }

    #[test]
    fn duplicated_tokens_under_averaging_are_symmetric() {
        let (clf, emb) = model(Arch::Dan);
        let q = TokenSequence::from(&["c", "c"][..]);
        let s = saliency_leave_one_out(&clf, &emb, &q, 0).unwrap();
        assert_eq!(s.evidence.weights[0], s.evidence.weights[1]);
        // removing one copy leaves the average, hence the prediction, unchanged
        assert!(s.evidence.weights[0].abs() < 1e-9);
    }

    #[test]
    fn argument_errors() {
        let (clf, emb) = model(Arch::Dan);
        let one = TokenSequence::from(&["a"][..]);
        assert!(matches!(saliency_leave_one_out(&clf, &emb, &one, 0), Err(NeuralError::TooShortForRemoval)));
        assert!(matches!(
            saliency_gradient(&clf, &emb, &one, 3),
            Err(NeuralError::TargetOutOfRange { target: 3, num_classes: 3 })
        ));
        assert!(matches!(saliency_gradient(&clf, &emb, &TokenSequence::default(), 0), Err(NeuralError::EmptyInput)));
    }
}

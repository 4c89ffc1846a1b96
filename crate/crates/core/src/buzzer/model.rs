use serde::{Deserialize, Serialize};
use std::sync::Arc;

use super::BuzzError;
use crate::corpus::{AnswerLabel, Dataset, TokenSequence};
use crate::ir::InvertedIndex;
use crate::neural::{saliency_gradient, Classifier, EmbeddingTable};
use crate::prediction::{EvidenceMap, GuessList};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelFamily {
    Ir,
    Neural,
}

/// A question answerer that can be asked about any prefix of a question.
///
/// Class indices in guesses refer to the model's own [`QAModel::answers`];
/// callers compare answers across models by canonical name.
pub trait QAModel: Send + Sync {
    fn id(&self) -> &str;

    fn family(&self) -> ModelFamily;

    fn answers(&self) -> &[AnswerLabel];

    fn guess(&self, query: &TokenSequence, k: usize) -> Result<GuessList, BuzzError>;

    /// Per-token support for `class_index` on `query`.
    fn evidence(&self, query: &TokenSequence, class_index: usize) -> Result<EvidenceMap, BuzzError>;

    fn label(&self, canonical_name: &str) -> Option<&AnswerLabel> {
        self.answers().iter().find(|l| l.canonical_name == canonical_name)
    }
}

/// BM25 retrieval; evidence is the additive highlight.
#[derive(Debug, Clone)]
pub struct IrModel {
    id: String,
    index: Arc<InvertedIndex>,
}

impl IrModel {
    pub fn new(id: impl Into<String>, index: impl Into<Arc<InvertedIndex>>) -> Self {
        IrModel {
            id: id.into(),
            index: index.into(),
        }
    }

    pub fn index(&self) -> &InvertedIndex {
        &self.index
    }
}

impl QAModel for IrModel {
    fn id(&self) -> &str {
        &self.id
    }

    fn family(&self) -> ModelFamily {
        ModelFamily::Ir
    }

    fn answers(&self) -> &[AnswerLabel] {
        self.index.answers()
    }

    fn guess(&self, query: &TokenSequence, k: usize) -> Result<GuessList, BuzzError> {
        Ok(self.index.guess(query, k))
    }

    fn evidence(&self, query: &TokenSequence, class_index: usize) -> Result<EvidenceMap, BuzzError> {
        Ok(self.index.highlight(query, class_index)?)
    }
}

/// Neural classifier; evidence is gradient saliency on the class logit.
#[derive(Debug, Clone)]
pub struct NeuralModel {
    id: String,
    clf: Arc<Classifier>,
    emb: Arc<EmbeddingTable>,
}

impl NeuralModel {
    pub fn new(id: impl Into<String>, clf: impl Into<Arc<Classifier>>, emb: Arc<EmbeddingTable>) -> Self {
        NeuralModel {
            id: id.into(),
            clf: clf.into(),
            emb,
        }
    }

    pub fn classifier(&self) -> &Classifier {
        &self.clf
    }

    pub fn embeddings(&self) -> &EmbeddingTable {
        &self.emb
    }
}

impl QAModel for NeuralModel {
    fn id(&self) -> &str {
        &self.id
    }

    fn family(&self) -> ModelFamily {
        ModelFamily::Neural
    }

    fn answers(&self) -> &[AnswerLabel] {
        self.clf.labels()
    }

    fn guess(&self, query: &TokenSequence, k: usize) -> Result<GuessList, BuzzError> {
        Ok(self.clf.guess(&self.emb, query, k)?)
    }

    fn evidence(&self, query: &TokenSequence, class_index: usize) -> Result<EvidenceMap, BuzzError> {
        Ok(saliency_gradient(self.clf.as_ref(), &self.emb, query, class_index)?.evidence)
    }
}

/// Answers by exact prefix match against a fixed set of questions.
///
/// A query that is a prefix of a known question gets that question's answer
/// with score 1; anything else gets no guess at all. Ties between questions
/// go to the first in dataset order.
#[derive(Debug, Clone)]
pub struct PrefixLookup {
    id: String,
    family: ModelFamily,
    labels: Vec<AnswerLabel>,
    entries: Vec<(TokenSequence, usize)>,
}

impl PrefixLookup {
    pub fn from_dataset(id: impl Into<String>, ds: &Dataset) -> Self {
        PrefixLookup {
            id: id.into(),
            family: ModelFamily::Ir,
            labels: ds.answer_vocab().to_vec(),
            entries: ds
                .questions()
                .iter()
                .map(|q| (q.tokens.clone(), q.answer.class_index))
                .collect(),
        }
    }

    pub fn with_family(mut self, family: ModelFamily) -> Self {
        self.family = family;
        self
    }

    fn matching(&self, query: &TokenSequence) -> Option<usize> {
        self.entries
            .iter()
            .find(|(tokens, _)| !query.is_empty() && tokens.starts_with(query))
            .map(|(_, class)| *class)
    }
}

impl QAModel for PrefixLookup {
    fn id(&self) -> &str {
        &self.id
    }

    fn family(&self) -> ModelFamily {
        self.family
    }

    fn answers(&self) -> &[AnswerLabel] {
        &self.labels
    }

    fn guess(&self, query: &TokenSequence, k: usize) -> Result<GuessList, BuzzError> {
        Ok(match self.matching(query) {
            Some(class) if k > 0 => GuessList::top_k(&self.labels[class..=class], &[1.0], 1),
            _ => GuessList::default(),
        })
    }

    fn evidence(&self, query: &TokenSequence, class_index: usize) -> Result<EvidenceMap, BuzzError> {
        let hit = self.matching(query) == Some(class_index);
        Ok(EvidenceMap::raw(vec![if hit { 1.0 } else { 0.0 }; query.len()]))
    }
}

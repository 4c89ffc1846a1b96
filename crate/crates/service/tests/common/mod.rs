#![allow(dead_code)]

use std::sync::Arc;

use advqa_core::buzzer::{IrModel, NeuralModel, QAModel};
use advqa_core::corpus::synth::{generate, SynthConfig, SyntheticCorpus};
use advqa_core::corpus::{Dataset, Question, ValidationPolicy};
use advqa_core::ir::InvertedIndex;
use advqa_core::neural::{self, Arch, EmbeddingTable, TrainConfig};
use advqa_service::Service;

pub struct Fixture {
    pub corpus: SyntheticCorpus,
    pub train: Arc<Dataset>,
    pub models: Vec<Arc<dyn QAModel>>,
}

impl Fixture {
    pub fn test_questions(&self) -> Vec<Question> {
        self.train.test_questions().cloned().collect()
    }

    pub fn train_questions(&self) -> Vec<Question> {
        self.train.train_questions().cloned().collect()
    }

    pub fn open(&self, dir: &std::path::Path) -> Service {
        Service::open(self.models.clone(), self.train.clone(), ValidationPolicy::default(), dir).unwrap()
    }
}

/// Synthetic corpus with a BM25 model `ir` and a small DAN `dan`.
pub fn fixture() -> Fixture {
    let corpus = generate(&SynthConfig::default()).unwrap();
    let train = Arc::new(corpus.dataset.clone());
    let index = InvertedIndex::build(&train).unwrap();
    let emb = Arc::new(EmbeddingTable::random(corpus.vocabulary(), 24, 3));
    let cfg = TrainConfig {
        arch: Arch::Dan,
        epochs: 8,
        batch_size: 8,
        learning_rate: 3e-3,
        hidden: 16,
        ..TrainConfig::default()
    };
    let (clf, _) = neural::train(&train, &emb, &cfg).unwrap();
    let models: Vec<Arc<dyn QAModel>> = vec![
        Arc::new(IrModel::new("ir", Arc::new(index))),
        Arc::new(NeuralModel::new("dan", clf, emb)),
    ];
    Fixture { corpus, train, models }
}

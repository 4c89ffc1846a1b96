use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::classifier::{Arch, Classifier};
use super::embedding::EmbeddingTable;
use super::linalg::{cross_entropy, softmax};
use super::NeuralError;
use crate::corpus::Dataset;

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub arch: Arch,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub hidden: usize,
    /// Probability of keeping each pooled feature during training; 1.0 disables dropout.
    pub dropout_keep: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            arch: Arch::Dan,
            epochs: 20,
            batch_size: 32,
            learning_rate: 1e-3,
            seed: 0,
            hidden: 64,
            dropout_keep: 1.0,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<(), NeuralError> {
        let ok = self.batch_size > 0
            && self.hidden > 0
            && self.learning_rate > 0.0
            && self.dropout_keep > 0.0
            && self.dropout_keep <= 1.0;
        if ok {
            Ok(())
        } else {
            Err(NeuralError::InvalidConfig(format!("{self:?}")))
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// Mean per-example training loss of each epoch.
    pub epoch_losses: Vec<f64>,
    pub steps: usize,
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
    lr: f64,
}

impl Adam {
    fn new(n: usize, lr: f64) -> Self {
        Adam {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
            lr,
        }
    }

    fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        self.t += 1;
        let c1 = 1.0 - BETA1.powi(self.t);
        let c2 = 1.0 - BETA2.powi(self.t);
        for i in 0..params.len() {
            self.m[i] = BETA1 * self.m[i] + (1.0 - BETA1) * grad[i];
            self.v[i] = BETA2 * self.v[i] + (1.0 - BETA2) * grad[i] * grad[i];
            let m_hat = self.m[i] / c1;
            let v_hat = self.v[i] / c2;
            params[i] -= self.lr * m_hat / (v_hat.sqrt() + ADAM_EPS);
        }
    }
}

/// Trains a classifier over the training split of `train`, one class per
/// vocabulary entry. Deterministic in `(train, emb, cfg)`.
pub fn train(train: &Dataset, emb: &EmbeddingTable, cfg: &TrainConfig) -> Result<(Classifier, TrainReport), NeuralError> {
    cfg.validate()?;
    let labels = train.answer_vocab().to_vec();
    if labels.len() < 2 {
        return Err(NeuralError::TooFewClasses(labels.len()));
    }
    let examples: Vec<(Vec<&[f64]>, usize)> = train
        .train_questions()
        .map(|q| (emb.lookup_all(&q.tokens), q.answer.class_index))
        .collect();
    let mut seen = vec![false; labels.len()];
    examples.iter().for_each(|(_, y)| seen[*y] = true);
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(NeuralError::EmptyClass(labels[missing].canonical_name.clone()));
    }

    let mut clf = Classifier::init(cfg.arch, emb.dim(), cfg.hidden, labels, cfg.seed)?;
    let mut adam = Adam::new(clf.params().len(), cfg.learning_rate);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(1);
    let mut order: Vec<usize> = (0..examples.len()).collect();
    let mut report = TrainReport::default();
    let feat_dim = clf.layout().get("output.weight").map(|s| s.cols).unwrap_or(cfg.hidden);

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for (batch_no, batch) in order.chunks(cfg.batch_size).enumerate() {
            let mut grad = vec![0.0; clf.params().len()];
            let scale = 1.0 / batch.len() as f64;
            let mut batch_loss = 0.0;
            for &i in batch {
                let (inputs, target) = &examples[i];
                let mask = (cfg.dropout_keep < 1.0).then(|| {
                    (0..feat_dim)
                        .map(|_| if rng.random::<f64>() < cfg.dropout_keep { 1.0 / cfg.dropout_keep } else { 0.0 })
                        .collect()
                });
                let cache = clf.forward_cached(inputs, mask);
                batch_loss += cross_entropy(&cache.logits, *target);
                let mut dlogits = softmax(&cache.logits);
                dlogits[*target] -= 1.0;
                dlogits.iter_mut().for_each(|d| *d *= scale);
                clf.backward(&cache, &dlogits, &mut grad, inputs);
            }
            if !batch_loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                return Err(NeuralError::NonFiniteLoss { epoch: epoch + 1, batch: batch_no + 1 });
            }
            epoch_loss += batch_loss;
            adam.step(clf.params_mut(), &grad);
            report.steps += 1;
        }
        report.epoch_losses.push(epoch_loss / examples.len() as f64);
    }
    Ok((clf, report))
}

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::embedding::EmbeddingTable;
use super::encoder::{DanEncoder, Encoder, EncoderCache, GruCell};
use super::layout::Layout;
use super::linalg::{add_assign, add_matvec_t, add_outer, affine, cross_entropy, softmax};
use super::NeuralError;
use crate::corpus::{AnswerLabel, TokenSequence};
use crate::prediction::GuessList;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Arch {
    Dan,
    Gru { bidirectional: bool },
}

impl Arch {
    pub fn name(&self) -> &'static str {
        match self {
            Arch::Dan => "dan",
            Arch::Gru { bidirectional: false } => "gru",
            Arch::Gru { bidirectional: true } => "bigru",
        }
    }

    /// Number of trainable parameters for the given sizes.
    pub fn param_count(&self, dim: usize, hidden: usize, num_classes: usize) -> usize {
        match self {
            Arch::Dan => hidden * dim + hidden + num_classes * hidden + num_classes,
            Arch::Gru { bidirectional } => {
                let dirs = if *bidirectional { 2 } else { 1 };
                dirs * 3 * (hidden * dim + hidden * hidden + hidden) + num_classes * hidden * dirs + num_classes
            }
        }
    }
}

impl std::str::FromStr for Arch {
    type Err = NeuralError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "dan" => Ok(Arch::Dan),
            "gru" | "rnn" => Ok(Arch::Gru { bidirectional: false }),
            "bigru" | "birnn" => Ok(Arch::Gru { bidirectional: true }),
            other => Err(NeuralError::Format(format!("unknown architecture `{other}`"))),
        }
    }
}

/// Everything a backward pass needs from the matching forward pass.
pub(super) struct ForwardCache {
    encoder: EncoderCache,
    feat: Vec<f64>,
    mask: Option<Vec<f64>>,
    pub(super) logits: Vec<f64>,
}

/// Loss, parameter gradient and per-token input gradient for one example.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub loss: f64,
    pub params: Vec<f64>,
    pub inputs: Vec<Vec<f64>>,
}

/// Softmax classifier over a DAN or GRU encoding of frozen word vectors.
#[derive(Debug, Clone)]
pub struct Classifier {
    arch: Arch,
    dim: usize,
    hidden: usize,
    seed: u64,
    labels: Vec<AnswerLabel>,
    params: Vec<f64>,
    layout: Layout,
    encoder: Encoder,
    out_w: std::ops::Range<usize>,
    out_b: std::ops::Range<usize>,
}

impl PartialEq for Classifier {
    fn eq(&self, other: &Self) -> bool {
        self.arch == other.arch
            && self.dim == other.dim
            && self.hidden == other.hidden
            && self.seed == other.seed
            && self.labels == other.labels
            && self.params.len() == other.params.len()
            && self.params.iter().zip(&other.params).all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

impl Classifier {
    /// Xavier-uniform weights and zero biases, drawn from `seed`.
    pub fn init(arch: Arch, dim: usize, hidden: usize, labels: Vec<AnswerLabel>, seed: u64) -> Result<Self, NeuralError> {
        let mut clf = Self::zeros(arch, dim, hidden, labels, seed)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for seg in clf.layout.segments().to_vec() {
            if seg.is_bias() {
                continue;
            }
            let bound = (6.0 / (seg.rows + seg.cols) as f64).sqrt();
            for p in &mut clf.params[seg.range()] {
                *p = rng.random_range(-bound..=bound);
            }
        }
        Ok(clf)
    }

    /// All-zero parameters; used by deserialization and tests.
    pub fn zeros(arch: Arch, dim: usize, hidden: usize, labels: Vec<AnswerLabel>, seed: u64) -> Result<Self, NeuralError> {
        if labels.len() < 2 {
            return Err(NeuralError::TooFewClasses(labels.len()));
        }
        if dim == 0 || hidden == 0 {
            return Err(NeuralError::InvalidConfig("dim and hidden must be positive".into()));
        }
        let mut layout = Layout::default();
        let (encoder, feat_dim) = match arch {
            Arch::Dan => (Encoder::Dan(DanEncoder::new(&mut layout, dim, hidden)), hidden),
            Arch::Gru { bidirectional } => {
                let forward = GruCell::new(&mut layout, "gru.fwd", dim, hidden, false);
                let backward = bidirectional.then(|| GruCell::new(&mut layout, "gru.bwd", dim, hidden, true));
                let dirs = if bidirectional { 2 } else { 1 };
                (Encoder::Gru { forward, backward }, hidden * dirs)
            }
        };
        let num_classes = labels.len();
        let out_w = layout.push("output.weight", num_classes, feat_dim);
        let out_b = layout.push("output.bias", num_classes, 1);
        debug_assert_eq!(layout.total(), arch.param_count(dim, hidden, num_classes));
        Ok(Classifier {
            arch,
            dim,
            hidden,
            seed,
            params: vec![0.0; layout.total()],
            labels,
            layout,
            encoder,
            out_w,
            out_b,
        })
    }

    pub fn arch(&self) -> Arch {
        self.arch
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn num_classes(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[AnswerLabel] {
        &self.labels
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn segment_mut(&mut self, name: &str) -> Option<&mut [f64]> {
        let range = self.layout.get(name)?.range();
        Some(&mut self.params[range])
    }

    pub(super) fn forward_cached(&self, inputs: &[&[f64]], mask: Option<Vec<f64>>) -> ForwardCache {
        let (feat, encoder) = self.encoder.forward(&self.params, inputs);
        let pooled: Vec<f64> = match &mask {
            Some(m) => feat.iter().zip(m).map(|(f, m)| f * m).collect(),
            None => feat.clone(),
        };
        let mut logits = vec![0.0; self.num_classes()];
        affine(&self.params[self.out_w.clone()], &self.params[self.out_b.clone()], &pooled, &mut logits);
        ForwardCache {
            encoder,
            feat,
            mask,
            logits,
        }
    }

    /// Accumulates `∂/∂params` into `grad` and returns `∂/∂inputs` for the
    /// upstream gradient `dlogits`.
    pub(super) fn backward(
        &self,
        cache: &ForwardCache,
        dlogits: &[f64],
        grad: &mut [f64],
        inputs: &[&[f64]],
    ) -> Vec<Vec<f64>> {
        let pooled: Vec<f64> = match &cache.mask {
            Some(m) => cache.feat.iter().zip(m).map(|(f, m)| f * m).collect(),
            None => cache.feat.clone(),
        };
        add_outer(&mut grad[self.out_w.clone()], dlogits, &pooled);
        add_assign(&mut grad[self.out_b.clone()], dlogits);
        let mut dfeat = vec![0.0; pooled.len()];
        add_matvec_t(&self.params[self.out_w.clone()], dlogits, &mut dfeat);
        if let Some(m) = &cache.mask {
            dfeat.iter_mut().zip(m).for_each(|(d, m)| *d *= m);
        }
        self.encoder.backward(&self.params, &cache.encoder, &dfeat, grad, inputs, self.dim)
    }

    fn check_inputs(&self, inputs: &[&[f64]]) -> Result<(), NeuralError> {
        if inputs.is_empty() {
            return Err(NeuralError::EmptyInput);
        }
        if let Some(bad) = inputs.iter().find(|v| v.len() != self.dim) {
            return Err(NeuralError::DimensionMismatch {
                expected: self.dim,
                found: bad.len(),
            });
        }
        Ok(())
    }

    /// Pre-softmax class scores for a sequence of input vectors.
    pub fn logits_from_vectors(&self, inputs: &[&[f64]]) -> Result<Vec<f64>, NeuralError> {
        self.check_inputs(inputs)?;
        Ok(self.forward_cached(inputs, None).logits)
    }

    pub fn logits(&self, emb: &EmbeddingTable, q: &TokenSequence) -> Result<Vec<f64>, NeuralError> {
        self.check_table(emb)?;
        self.logits_from_vectors(&emb.lookup_all(q))
    }

    /// Class probabilities; sums to one.
    pub fn forward(&self, emb: &EmbeddingTable, q: &TokenSequence) -> Result<Vec<f64>, NeuralError> {
        Ok(softmax(&self.logits(emb, q)?))
    }

    pub fn guess(&self, emb: &EmbeddingTable, q: &TokenSequence, k: usize) -> Result<GuessList, NeuralError> {
        Ok(GuessList::top_k(&self.labels, &self.forward(emb, q)?, k))
    }

    /// Cross-entropy loss and its exact gradients for one example, without dropout.
    pub fn loss_gradients(&self, inputs: &[&[f64]], target: usize) -> Result<Gradients, NeuralError> {
        self.check_inputs(inputs)?;
        self.check_target(target)?;
        let cache = self.forward_cached(inputs, None);
        let mut dlogits = softmax(&cache.logits);
        dlogits[target] -= 1.0;
        let mut params = vec![0.0; self.params.len()];
        let inputs_grad = self.backward(&cache, &dlogits, &mut params, inputs);
        Ok(Gradients {
            loss: cross_entropy(&cache.logits, target),
            params,
            inputs: inputs_grad,
        })
    }

    pub fn loss(&self, inputs: &[&[f64]], target: usize) -> Result<f64, NeuralError> {
        self.check_target(target)?;
        Ok(cross_entropy(&self.logits_from_vectors(inputs)?, target))
    }

    /// Gradient of one class's logit with respect to each input vector.
    pub fn logit_input_gradients(&self, inputs: &[&[f64]], target: usize) -> Result<Vec<Vec<f64>>, NeuralError> {
        self.check_inputs(inputs)?;
        self.check_target(target)?;
        let cache = self.forward_cached(inputs, None);
        let mut dlogits = vec![0.0; self.num_classes()];
        dlogits[target] = 1.0;
        let mut scratch = vec![0.0; self.params.len()];
        Ok(self.backward(&cache, &dlogits, &mut scratch, inputs))
    }

    pub(super) fn check_target(&self, target: usize) -> Result<(), NeuralError> {
        if target >= self.num_classes() {
            return Err(NeuralError::TargetOutOfRange {
                target,
                num_classes: self.num_classes(),
            });
        }
        Ok(())
    }

    pub(super) fn check_table(&self, emb: &EmbeddingTable) -> Result<(), NeuralError> {
        if emb.dim() != self.dim {
            return Err(NeuralError::DimensionMismatch {
                expected: self.dim,
                found: emb.dim(),
            });
        }
        Ok(())
    }

    pub(super) fn from_parts(
        arch: Arch,
        dim: usize,
        hidden: usize,
        labels: Vec<AnswerLabel>,
        seed: u64,
        params: Vec<f64>,
    ) -> Result<Self, NeuralError> {
        let mut clf = Self::zeros(arch, dim, hidden, labels, seed)?;
        if params.len() != clf.params.len() {
            return Err(NeuralError::Format(format!(
                "expected {} parameters, found {}",
                clf.params.len(),
                params.len()
            )));
        }
        clf.params = params;
        Ok(clf)
    }
}

use advqa_core::corpus::{synth, AnswerLabel, TokenSequence};
use advqa_core::neural::{
    saliency_gradient, saliency_leave_one_out_scaled, softmax, train, Arch, Classifier, EmbeddingTable,
    LeaveOneOutScale, LogitModel, NeuralError, TrainConfig,
};
use proptest::prelude::*;

/// logits = A · Σ_i v_i + c, a sum-pooled bag of words with closed-form gradients.
struct LinearBow {
    a: Vec<Vec<f64>>,
    c: Vec<f64>,
}

impl LogitModel for LinearBow {
    fn num_classes(&self) -> usize {
        self.a.len()
    }

    fn input_dim(&self) -> usize {
        self.a[0].len()
    }

    fn logits(&self, inputs: &[&[f64]]) -> Result<Vec<f64>, NeuralError> {
        Ok(self
            .a
            .iter()
            .zip(&self.c)
            .map(|(row, c)| c + inputs.iter().map(|v| row.iter().zip(*v).map(|(x, y)| x * y).sum::<f64>()).sum::<f64>())
            .collect())
    }

    fn logit_input_gradients(&self, inputs: &[&[f64]], target: usize) -> Result<Vec<Vec<f64>>, NeuralError> {
        Ok(vec![self.a[target].clone(); inputs.len()])
    }
}

fn vec_strategy(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0f64..2.0, dim)
}

fn linear_case() -> impl Strategy<Value = (LinearBowParts, Vec<String>)> {
    (1usize..6, 2usize..5).prop_flat_map(|(dim, classes)| {
        (
            prop::collection::vec(vec_strategy(dim), classes),
            vec_strategy(classes),
            prop::collection::vec(vec_strategy(dim), 4),
            prop::collection::vec(prop::sample::select(vec!["w0", "w1", "w2", "w3", "oov"]), 2..10),
        )
            .prop_map(|(a, c, vecs, toks)| {
                ((a, c, vecs), toks.into_iter().map(String::from).collect())
            })
    })
}

type LinearBowParts = (Vec<Vec<f64>>, Vec<f64>, Vec<Vec<f64>>);

fn build((a, c, vecs): LinearBowParts) -> (LinearBow, EmbeddingTable) {
    let mut emb = EmbeddingTable::new(a[0].len());
    for (i, v) in vecs.into_iter().enumerate() {
        emb.insert(format!("w{i}"), v).unwrap();
    }
    (LinearBow { a, c }, emb)
}

proptest! {
    #[test]
    fn gradient_saliency_is_exact_logit_drop_on_linear_model((parts, toks) in linear_case()) {
        let (model, emb) = build(parts);
        let q = TokenSequence::from(toks);
        for target in 0..model.num_classes() {
            let s = saliency_gradient(&model, &emb, &q, target).unwrap();
            prop_assert_eq!(s.evidence.len(), q.len());
            let full = model.logits(&emb.lookup_all(&q)).unwrap()[target];
            for i in 0..q.len() {
                let without = q.without(i);
                let reduced = model.logits(&emb.lookup_all(&without)).unwrap()[target];
                prop_assert!((s.evidence.weights[i] - (full - reduced)).abs() <= 1e-9);
            }
            let loo = saliency_leave_one_out_scaled(&model, &emb, &q, target, LeaveOneOutScale::Logit).unwrap();
            for (g, l) in s.evidence.weights.iter().zip(&loo.evidence.weights) {
                prop_assert!((g - l).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn forward_is_a_distribution(seed in 0u64..1000, arch_i in 0usize..3, toks in prop::collection::vec("[a-e]", 1..10)) {
        let arch = [Arch::Dan, Arch::Gru { bidirectional: false }, Arch::Gru { bidirectional: true }][arch_i];
        let labels = (0..4).map(|i| AnswerLabel::new(format!("L{i}"), i)).collect();
        let clf = Classifier::init(arch, 6, 5, labels, seed).unwrap();
        let emb = EmbeddingTable::random(["a", "b", "c"], 6, seed);
        let p = clf.forward(&emb, &TokenSequence::from(toks)).unwrap();
        prop_assert_eq!(p.len(), 4);
        prop_assert!(p.iter().all(|x| *x >= 0.0));
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-6);
    }

    #[test]
    fn scaling_logits_keeps_argmax(logits in prop::collection::vec(-30.0f64..30.0, 2..8), scale in 1e-3f64..1e3) {
        let top = |xs: &[f64]| {
            let mut best = 0;
            for i in 1..xs.len() {
                if xs[i] > xs[best] {
                    best = i;
                }
            }
            best
        };
        let scaled: Vec<f64> = logits.iter().map(|l| l * scale).collect();
        prop_assert_eq!(top(&softmax(&logits)), top(&softmax(&scaled)));
    }
}

#[test]
fn scaling_output_layer_keeps_top_guess() {
    let corpus = synth::generate(&synth::SynthConfig { num_answers: 4, per_answer: 6, ..Default::default() }).unwrap();
    let emb = EmbeddingTable::random(corpus.vocabulary(), 12, 5);
    for arch in [Arch::Dan, Arch::Gru { bidirectional: false }] {
        let cfg = TrainConfig { arch, epochs: 3, hidden: 6, batch_size: 4, ..Default::default() };
        let (clf, _) = train(&corpus.dataset, &emb, &cfg).unwrap();
        for scale in [0.01, 0.5, 3.0, 40.0] {
            let mut scaled = clf.clone();
            scaled.segment_mut("output.weight").unwrap().iter_mut().for_each(|w| *w *= scale);
            scaled.segment_mut("output.bias").unwrap().iter_mut().for_each(|w| *w *= scale);
            for q in corpus.dataset.questions() {
                let a = clf.guess(&emb, &q.tokens, 1).unwrap();
                let b = scaled.guess(&emb, &q.tokens, 1).unwrap();
                assert_eq!(a.top().unwrap().answer, b.top().unwrap().answer);
            }
        }
    }
}

fn seg<'a>(clf: &'a Classifier, name: &str) -> (&'a [f64], usize) {
    let s = clf.layout().get(name).unwrap();
    (&clf.params()[s.range()], s.cols)
}

fn sig(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// out[r] = b[r] + Σ_c W[r][c] x[c], written out longhand.
fn lin(w: &[f64], cols: usize, x: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    for r in 0..b.len() {
        let mut acc = b[r];
        for c in 0..cols {
            acc += w[r * cols + c] * x[c];
        }
        out.push(acc);
    }
    out
}

fn scalar_gru(clf: &Classifier, prefix: &str, xs: &[Vec<f64>]) -> Vec<f64> {
    let g = |n: &str| seg(clf, &format!("{prefix}.{n}"));
    let hidden = clf.hidden();
    let mut h = vec![0.0; hidden];
    for x in xs {
        let (wz, dc) = g("w_z");
        let (uz, hc) = g("u_z");
        let zeros = vec![0.0; hidden];
        let mut z = lin(wz, dc, x, g("b_z").0);
        let zu = lin(uz, hc, &h, &zeros);
        let r: Vec<f64> = lin(g("w_r").0, dc, x, g("b_r").0)
            .iter()
            .zip(lin(g("u_r").0, hc, &h, &zeros))
            .map(|(a, b)| sig(a + b))
            .collect();
        for k in 0..hidden {
            z[k] = sig(z[k] + zu[k]);
        }
        let rh: Vec<f64> = r.iter().zip(&h).map(|(a, b)| a * b).collect();
        let cu = lin(g("u_c").0, hc, &rh, &zeros);
        let c: Vec<f64> = lin(g("w_c").0, dc, x, g("b_c").0).iter().zip(cu).map(|(a, b)| (a + b).tanh()).collect();
        h = (0..hidden).map(|k| (1.0 - z[k]) * c[k] + z[k] * h[k]).collect();
    }
    h
}

fn scalar_forward(clf: &Classifier, xs: &[Vec<f64>]) -> Vec<f64> {
    let feat = match clf.arch() {
        Arch::Dan => {
            let d = clf.dim();
            let mut avg = vec![0.0; d];
            for x in xs {
                for j in 0..d {
                    avg[j] += x[j];
                }
            }
            for a in avg.iter_mut() {
                *a /= xs.len() as f64;
            }
            let (w, cols) = seg(clf, "dan.hidden.weight");
            lin(w, cols, &avg, seg(clf, "dan.hidden.bias").0).into_iter().map(f64::tanh).collect()
        }
        Arch::Gru { bidirectional } => {
            let mut f = scalar_gru(clf, "gru.fwd", xs);
            if bidirectional {
                let rev: Vec<Vec<f64>> = xs.iter().rev().cloned().collect();
                f.extend(scalar_gru(clf, "gru.bwd", &rev));
            }
            f
        }
    };
    let (w, cols) = seg(clf, "output.weight");
    let logits = lin(w, cols, &feat, seg(clf, "output.bias").0);
    let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = logits.iter().map(|l| (l - m).exp()).collect();
    let z: f64 = e.iter().sum();
    e.iter().map(|x| x / z).collect()
}

#[test]
fn trained_forward_matches_scalar_reimplementation() {
    let corpus = synth::generate(&synth::SynthConfig { num_answers: 5, per_answer: 8, ..Default::default() }).unwrap();
    let emb = EmbeddingTable::random(corpus.vocabulary(), 10, 2);
    let q = &corpus.dataset.test_questions().next().unwrap().tokens;
    let xs: Vec<Vec<f64>> = q.iter().map(|t| emb.lookup(t).to_vec()).collect();
    for arch in [Arch::Dan, Arch::Gru { bidirectional: false }, Arch::Gru { bidirectional: true }] {
        let cfg = TrainConfig { arch, epochs: 5, hidden: 7, batch_size: 4, learning_rate: 1e-2, ..Default::default() };
        let (clf, _) = train(&corpus.dataset, &emb, &cfg).unwrap();
        let got = clf.forward(&emb, q).unwrap();
        let want = scalar_forward(&clf, &xs);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() <= 1e-6, "{}: {got:?} vs {want:?}", arch.name());
        }
    }
}

#[test]
fn final_epoch_loss_not_above_first() {
    let corpus = synth::generate(&synth::SynthConfig::default()).unwrap();
    let emb = EmbeddingTable::random(corpus.vocabulary(), 32, 1);
    for arch in [Arch::Dan, Arch::Gru { bidirectional: false }] {
        let cfg = TrainConfig { arch, epochs: 6, hidden: 16, batch_size: 16, learning_rate: 3e-3, ..Default::default() };
        let (_, report) = train(&corpus.dataset, &emb, &cfg).unwrap();
        assert_eq!(report.epoch_losses.len(), 6);
        assert!(report.epoch_losses[5] <= report.epoch_losses[0], "{:?}", report.epoch_losses);
    }
}

#[test]
fn all_oov_dan_is_bias_only() {
    let labels = (0..3).map(|i| AnswerLabel::new(format!("L{i}"), i)).collect();
    let clf = Classifier::init(Arch::Dan, 4, 3, labels, 8).unwrap();
    let emb = EmbeddingTable::random(["known"], 4, 1);
    let a = clf.forward(&emb, &TokenSequence::from(&["x", "y"][..])).unwrap();
    let b = clf.forward(&emb, &TokenSequence::from(&["zzz"][..])).unwrap();
    assert_eq!(a, b);
}

#[test]
fn zero_output_layer_is_uniform() {
    let labels = (0..2).map(|i| AnswerLabel::new(format!("L{i}"), i)).collect();
    let mut clf = Classifier::init(Arch::Dan, 4, 3, labels, 8).unwrap();
    clf.segment_mut("output.weight").unwrap().fill(0.0);
    let emb = EmbeddingTable::random(["a"], 4, 1);
    assert_eq!(clf.forward(&emb, &TokenSequence::from(&["a"][..])).unwrap(), [0.5, 0.5]);
}

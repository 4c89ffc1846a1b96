//! Sequence encoders: embedding average + tanh layer (DAN) and GRU.
//!
//! Each encoder maps token vectors to a fixed-size feature vector and can
//! backpropagate a feature gradient into parameter and input gradients.

use std::ops::Range;

use super::layout::Layout;
use super::linalg::{add_assign, add_matvec, add_matvec_t, add_outer, affine, sigmoid};

#[derive(Debug, Clone)]
pub(super) struct DanEncoder {
    w: Range<usize>,
    b: Range<usize>,
    dim: usize,
    hidden: usize,
}

pub(super) struct DanCache {
    avg: Vec<f64>,
    feat: Vec<f64>,
}

impl DanEncoder {
    pub(super) fn new(layout: &mut Layout, dim: usize, hidden: usize) -> Self {
        DanEncoder {
            w: layout.push("dan.hidden.weight", hidden, dim),
            b: layout.push("dan.hidden.bias", hidden, 1),
            dim,
            hidden,
        }
    }

    pub(super) fn forward(&self, params: &[f64], inputs: &[&[f64]]) -> (Vec<f64>, DanCache) {
        let mut avg = vec![0.0; self.dim];
        for v in inputs {
            add_assign(&mut avg, v);
        }
        let n = inputs.len() as f64;
        avg.iter_mut().for_each(|a| *a /= n);
        let mut feat = vec![0.0; self.hidden];
        affine(&params[self.w.clone()], &params[self.b.clone()], &avg, &mut feat);
        feat.iter_mut().for_each(|f| *f = f.tanh());
        (feat.clone(), DanCache { avg, feat })
    }

    pub(super) fn backward(
        &self,
        params: &[f64],
        cache: &DanCache,
        dfeat: &[f64],
        grad: &mut [f64],
        n_inputs: usize,
    ) -> Vec<Vec<f64>> {
        let da: Vec<f64> = dfeat.iter().zip(&cache.feat).map(|(g, h)| g * (1.0 - h * h)).collect();
        add_outer(&mut grad[self.w.clone()], &da, &cache.avg);
        add_assign(&mut grad[self.b.clone()], &da);
        let mut davg = vec![0.0; self.dim];
        add_matvec_t(&params[self.w.clone()], &da, &mut davg);
        let scale = 1.0 / n_inputs as f64;
        let dv: Vec<f64> = davg.iter().map(|g| g * scale).collect();
        vec![dv; n_inputs]
    }
}

/// One GRU direction:
///   z = σ(W_z x + U_z h + b_z)
///   r = σ(W_r x + U_r h + b_r)
///   c = tanh(W_c x + U_c (r ⊙ h) + b_c)
///   h' = (1 − z) ⊙ c + z ⊙ h
#[derive(Debug, Clone)]
pub(super) struct GruCell {
    wz: Range<usize>,
    uz: Range<usize>,
    bz: Range<usize>,
    wr: Range<usize>,
    ur: Range<usize>,
    br: Range<usize>,
    wc: Range<usize>,
    uc: Range<usize>,
    bc: Range<usize>,
    hidden: usize,
    reverse: bool,
}

struct GruStep {
    input: usize,
    h_prev: Vec<f64>,
    z: Vec<f64>,
    r: Vec<f64>,
    c: Vec<f64>,
}

pub(super) struct GruCache {
    steps: Vec<GruStep>,
}

impl GruCell {
    pub(super) fn new(layout: &mut Layout, prefix: &str, dim: usize, hidden: usize, reverse: bool) -> Self {
        let mut seg = |name: &str, rows, cols| layout.push(format!("{prefix}.{name}"), rows, cols);
        GruCell {
            wz: seg("w_z", hidden, dim),
            uz: seg("u_z", hidden, hidden),
            bz: seg("b_z", hidden, 1),
            wr: seg("w_r", hidden, dim),
            ur: seg("u_r", hidden, hidden),
            br: seg("b_r", hidden, 1),
            wc: seg("w_c", hidden, dim),
            uc: seg("u_c", hidden, hidden),
            bc: seg("b_c", hidden, 1),
            hidden,
            reverse,
        }
    }

    pub(super) fn forward(&self, p: &[f64], inputs: &[&[f64]]) -> (Vec<f64>, GruCache) {
        let h_dim = self.hidden;
        let order: Vec<usize> = if self.reverse {
            (0..inputs.len()).rev().collect()
        } else {
            (0..inputs.len()).collect()
        };
        let mut h = vec![0.0; h_dim];
        let mut steps = Vec::with_capacity(inputs.len());
        for input in order {
            let x = inputs[input];
            let mut z = vec![0.0; h_dim];
            affine(&p[self.wz.clone()], &p[self.bz.clone()], x, &mut z);
            add_matvec(&p[self.uz.clone()], &h, &mut z);
            z.iter_mut().for_each(|v| *v = sigmoid(*v));

            let mut r = vec![0.0; h_dim];
            affine(&p[self.wr.clone()], &p[self.br.clone()], x, &mut r);
            add_matvec(&p[self.ur.clone()], &h, &mut r);
            r.iter_mut().for_each(|v| *v = sigmoid(*v));

            let rh: Vec<f64> = r.iter().zip(&h).map(|(a, b)| a * b).collect();
            let mut c = vec![0.0; h_dim];
            affine(&p[self.wc.clone()], &p[self.bc.clone()], x, &mut c);
            add_matvec(&p[self.uc.clone()], &rh, &mut c);
            c.iter_mut().for_each(|v| *v = v.tanh());

            let next: Vec<f64> = (0..h_dim).map(|k| (1.0 - z[k]) * c[k] + z[k] * h[k]).collect();
            steps.push(GruStep {
                input,
                h_prev: std::mem::replace(&mut h, next),
                z,
                r,
                c,
            });
        }
        (h, GruCache { steps })
    }

    /// Backpropagates `dh` (gradient w.r.t. the final state) through time,
    /// accumulating into `grad` and `dinputs`.
    pub(super) fn backward(
        &self,
        p: &[f64],
        cache: &GruCache,
        dh: &[f64],
        grad: &mut [f64],
        dinputs: &mut [Vec<f64>],
        inputs: &[&[f64]],
    ) {
        let h_dim = self.hidden;
        let mut dh = dh.to_vec();
        for step in cache.steps.iter().rev() {
            let x = inputs[step.input];
            let h_prev = &step.h_prev;
            let mut dh_prev: Vec<f64> = (0..h_dim).map(|k| dh[k] * step.z[k]).collect();

            let dz: Vec<f64> = (0..h_dim).map(|k| dh[k] * (h_prev[k] - step.c[k])).collect();
            let dc_pre: Vec<f64> = (0..h_dim)
                .map(|k| dh[k] * (1.0 - step.z[k]) * (1.0 - step.c[k] * step.c[k]))
                .collect();

            // candidate
            let rh: Vec<f64> = step.r.iter().zip(h_prev).map(|(a, b)| a * b).collect();
            add_outer(&mut grad[self.wc.clone()], &dc_pre, x);
            add_outer(&mut grad[self.uc.clone()], &dc_pre, &rh);
            add_assign(&mut grad[self.bc.clone()], &dc_pre);
            add_matvec_t(&p[self.wc.clone()], &dc_pre, &mut dinputs[step.input]);
            let mut drh = vec![0.0; h_dim];
            add_matvec_t(&p[self.uc.clone()], &dc_pre, &mut drh);
            for k in 0..h_dim {
                dh_prev[k] += drh[k] * step.r[k];
            }
            let dr_pre: Vec<f64> = (0..h_dim)
                .map(|k| drh[k] * h_prev[k] * step.r[k] * (1.0 - step.r[k]))
                .collect();
            let dz_pre: Vec<f64> = (0..h_dim).map(|k| dz[k] * step.z[k] * (1.0 - step.z[k])).collect();

            for (gate_pre, w, u, b) in [
                (&dz_pre, &self.wz, &self.uz, &self.bz),
                (&dr_pre, &self.wr, &self.ur, &self.br),
            ] {
                add_outer(&mut grad[w.clone()], gate_pre, x);
                add_outer(&mut grad[u.clone()], gate_pre, h_prev);
                add_assign(&mut grad[b.clone()], gate_pre);
                add_matvec_t(&p[w.clone()], gate_pre, &mut dinputs[step.input]);
                add_matvec_t(&p[u.clone()], gate_pre, &mut dh_prev);
            }
            dh = dh_prev;
        }
    }
}

// One per classifier, so the variant size gap does not matter.
#[allow(clippy::large_enum_variant)]
#[derive(Debug, Clone)]
pub(super) enum Encoder {
    Dan(DanEncoder),
    Gru { forward: GruCell, backward: Option<GruCell> },
}

pub(super) enum EncoderCache {
    Dan(DanCache),
    Gru(GruCache, Option<GruCache>),
}

impl Encoder {
    pub(super) fn forward(&self, params: &[f64], inputs: &[&[f64]]) -> (Vec<f64>, EncoderCache) {
        match self {
            Encoder::Dan(dan) => {
                let (feat, cache) = dan.forward(params, inputs);
                (feat, EncoderCache::Dan(cache))
            }
            Encoder::Gru { forward, backward } => {
                let (mut feat, fc) = forward.forward(params, inputs);
                let bc = backward.as_ref().map(|cell| {
                    let (h, c) = cell.forward(params, inputs);
                    feat.extend(h);
                    c
                });
                (feat, EncoderCache::Gru(fc, bc))
            }
        }
    }

    pub(super) fn backward(
        &self,
        params: &[f64],
        cache: &EncoderCache,
        dfeat: &[f64],
        grad: &mut [f64],
        inputs: &[&[f64]],
        dim: usize,
    ) -> Vec<Vec<f64>> {
        match (self, cache) {
            (Encoder::Dan(dan), EncoderCache::Dan(c)) => dan.backward(params, c, dfeat, grad, inputs.len()),
            (Encoder::Gru { forward, backward }, EncoderCache::Gru(fc, bc)) => {
                let mut dinputs = vec![vec![0.0; dim]; inputs.len()];
                let h = forward.hidden;
                forward.backward(params, fc, &dfeat[..h], grad, &mut dinputs, inputs);
                if let (Some(cell), Some(c)) = (backward, bc) {
                    cell.backward(params, c, &dfeat[h..], grad, &mut dinputs, inputs);
                }
                dinputs
            }
            _ => unreachable!("encoder cache from a different architecture"),
        }
    }
}

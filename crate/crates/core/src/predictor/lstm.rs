//! Single-layer LSTM, many-to-one, with a linear readout and hand-derived
//! backpropagation through time. Parameters live in one flat vector so the
//! optimizer and the finite-difference check can treat the model uniformly.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::features::FeatureWindow;
use crate::types::ProbVector;

use super::{cross_entropy, LabeledWindow};

#[derive(Debug, Clone, PartialEq)]
pub struct RecurrentModel {
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub num_classes: usize,
    /// Flat parameter block, see `ParamLayout`.
    pub params: Vec<f64>,
}

/// Offsets into the flat parameter vector. Gate order: input, forget, cell,
/// output; within a gate: input weights (H x D row-major), recurrent weights
/// (H x H), bias (H). Readout is K x H plus K biases.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ParamLayout {
    pub gates: [GateLayout; 4],
    pub out_w: usize,
    pub out_b: usize,
    pub total: usize,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct GateLayout {
    pub w_x: usize,
    pub w_h: usize,
    pub b: usize,
}

impl ParamLayout {
    pub fn new(d: usize, h: usize, k: usize) -> Self {
        let mut at = 0;
        let mut take = |n: usize| {
            let start = at;
            at += n;
            start
        };
        let mut gate = || GateLayout {
            w_x: take(h * d),
            w_h: take(h * h),
            b: take(h),
        };
        let gates = [gate(), gate(), gate(), gate()];
        ParamLayout {
            gates,
            out_w: take(k * h),
            out_b: take(k),
            total: at,
        }
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Forward pass scratch retained for backpropagation: per step, the previous
/// hidden/cell state and all gate activations.
pub(crate) struct ForwardCache {
    hs: Vec<f64>,
    cs: Vec<f64>,
    gates: [Vec<f64>; 4],
    tanh_c: Vec<f64>,
    pub probs: Vec<f64>,
}

impl RecurrentModel {
    pub(crate) fn layout(&self) -> ParamLayout {
        ParamLayout::new(self.input_dim, self.hidden_dim, self.num_classes)
    }

    /// Seeded initialization: weights uniform in [-1/sqrt(H), 1/sqrt(H)],
    /// biases zero.
    pub fn init(input_dim: usize, hidden_dim: usize, num_classes: usize, seed: u64) -> Self {
        let layout = ParamLayout::new(input_dim, hidden_dim, num_classes);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scale = 1.0 / (hidden_dim as f64).sqrt();
        let mut params = vec![0.0; layout.total];
        for gate in &layout.gates {
            for p in &mut params[gate.w_x..gate.b] {
                *p = rng.gen_range(-scale..scale);
            }
        }
        for p in &mut params[layout.out_w..layout.out_b] {
            *p = rng.gen_range(-scale..scale);
        }
        RecurrentModel {
            input_dim,
            hidden_dim,
            num_classes,
            params,
        }
    }

    pub fn num_params(&self) -> usize {
        self.layout().total
    }

    /// One cell step. `acts` receives the post-nonlinearity gate values
    /// (input, forget, cell, output) for the cache.
    #[allow(clippy::too_many_arguments)]
    fn step(
        &self,
        l: &ParamLayout,
        x: &[f64],
        h_prev: &[f64],
        c_prev: &[f64],
        acts: &mut [&mut [f64]; 4],
        c: &mut [f64],
        tanh_c: &mut [f64],
        h: &mut [f64],
    ) {
        let hd = self.hidden_dim;
        let d = self.input_dim;
        let p = &self.params;
        for i in 0..hd {
            let mut pre = [0.0f64; 4];
            for (g, gate) in l.gates.iter().enumerate() {
                let mut a = p[gate.b + i];
                for (j, &xj) in x.iter().enumerate().take(d) {
                    a += p[gate.w_x + i * d + j] * xj;
                }
                for (j, &hj) in h_prev.iter().enumerate() {
                    a += p[gate.w_h + i * hd + j] * hj;
                }
                pre[g] = a;
            }
            let gi = sigmoid(pre[0]);
            let gf = sigmoid(pre[1]);
            let gg = pre[2].tanh();
            let go = sigmoid(pre[3]);
            let ci = gf * c_prev[i] + gi * gg;
            let tc = ci.tanh();
            acts[0][i] = gi;
            acts[1][i] = gf;
            acts[2][i] = gg;
            acts[3][i] = go;
            c[i] = ci;
            tanh_c[i] = tc;
            h[i] = go * tc;
        }
    }

    fn readout(&self, l: &ParamLayout, h: &[f64]) -> Vec<f64> {
        let hd = self.hidden_dim;
        (0..self.num_classes)
            .map(|k| {
                let mut logit = self.params[l.out_b + k];
                for (j, &hj) in h.iter().enumerate() {
                    logit += self.params[l.out_w + k * hd + j] * hj;
                }
                logit
            })
            .collect()
    }

    /// Inference: run the cell across the window, read out the final hidden
    /// state, softmax.
    pub fn predict(&self, window: &FeatureWindow<'_>) -> ProbVector {
        let l = self.layout();
        let hd = self.hidden_dim;
        let mut h_prev = vec![0.0; hd];
        let mut c_prev = vec![0.0; hd];
        let mut h = vec![0.0; hd];
        let mut c = vec![0.0; hd];
        let mut tanh_c = vec![0.0; hd];
        let mut a0 = vec![0.0; hd];
        let mut a1 = vec![0.0; hd];
        let mut a2 = vec![0.0; hd];
        let mut a3 = vec![0.0; hd];
        for row in window.features {
            {
                let mut acts = [&mut a0[..], &mut a1[..], &mut a2[..], &mut a3[..]];
                self.step(&l, &row.values, &h_prev, &c_prev, &mut acts, &mut c, &mut tanh_c, &mut h);
            }
            std::mem::swap(&mut h_prev, &mut h);
            std::mem::swap(&mut c_prev, &mut c);
        }
        ProbVector::softmax(&self.readout(&l, &h_prev))
    }

    /// Training forward pass, retaining everything backprop needs.
    pub(crate) fn forward_cached(&self, sample: &LabeledWindow) -> ForwardCache {
        let l = self.layout();
        let hd = self.hidden_dim;
        let steps = sample.features.len();
        let mut cache = ForwardCache {
            hs: vec![0.0; (steps + 1) * hd],
            cs: vec![0.0; (steps + 1) * hd],
            gates: [
                vec![0.0; steps * hd],
                vec![0.0; steps * hd],
                vec![0.0; steps * hd],
                vec![0.0; steps * hd],
            ],
            tanh_c: vec![0.0; steps * hd],
            probs: Vec::new(),
        };
        for (t, row) in sample.features.iter().enumerate() {
            let (h_head, h_rest) = cache.hs.split_at_mut((t + 1) * hd);
            let (c_head, c_rest) = cache.cs.split_at_mut((t + 1) * hd);
            let [g0, g1, g2, g3] = &mut cache.gates;
            let mut acts = [
                &mut g0[t * hd..(t + 1) * hd],
                &mut g1[t * hd..(t + 1) * hd],
                &mut g2[t * hd..(t + 1) * hd],
                &mut g3[t * hd..(t + 1) * hd],
            ];
            self.step(
                &l,
                &row.values,
                &h_head[t * hd..],
                &c_head[t * hd..],
                &mut acts,
                &mut c_rest[..hd],
                &mut cache.tanh_c[t * hd..(t + 1) * hd],
                &mut h_rest[..hd],
            );
        }
        let logits = self.readout(&l, &cache.hs[steps * hd..]);
        cache.probs = ProbVector::softmax(&logits).as_slice().to_vec();
        cache
    }

    /// Accumulate the cross-entropy gradient for one sample into `grad`
    /// (same layout as `params`), scaled by `weight`. Returns the sample
    /// loss.
    pub(crate) fn backward(
        &self,
        sample: &LabeledWindow,
        cache: &ForwardCache,
        weight: f64,
        grad: &mut [f64],
    ) -> f64 {
        let l = self.layout();
        let hd = self.hidden_dim;
        let d = self.input_dim;
        let steps = sample.features.len();
        let p = &self.params;

        // d loss / d logits = probs - one_hot(label)
        let mut dlogits = cache.probs.clone();
        dlogits[sample.label] -= 1.0;

        let h_final = &cache.hs[steps * hd..];
        let mut gh = vec![0.0; hd];
        for (k, &dl) in dlogits.iter().enumerate() {
            grad[l.out_b + k] += weight * dl;
            for j in 0..hd {
                grad[l.out_w + k * hd + j] += weight * dl * h_final[j];
                gh[j] += p[l.out_w + k * hd + j] * dl;
            }
        }

        let mut gc = vec![0.0; hd];
        let mut gh_prev = vec![0.0; hd];
        let mut gc_prev = vec![0.0; hd];
        let mut da = [
            vec![0.0; hd],
            vec![0.0; hd],
            vec![0.0; hd],
            vec![0.0; hd],
        ];
        for t in (0..steps).rev() {
            let x = &sample.features[t].values;
            let h_prev = &cache.hs[t * hd..(t + 1) * hd];
            let c_prev = &cache.cs[t * hd..(t + 1) * hd];
            let span = t * hd..(t + 1) * hd;
            let gi = &cache.gates[0][span.clone()];
            let gf = &cache.gates[1][span.clone()];
            let gg = &cache.gates[2][span.clone()];
            let go = &cache.gates[3][span.clone()];
            let tc = &cache.tanh_c[span];

            gh_prev.iter_mut().for_each(|v| *v = 0.0);
            gc_prev.iter_mut().for_each(|v| *v = 0.0);
            for i in 0..hd {
                // h = o * tanh(c); c = f * c_prev + i * g
                let dc = gc[i] + gh[i] * go[i] * (1.0 - tc[i] * tc[i]);
                let d_o = gh[i] * tc[i];
                let d_f = dc * c_prev[i];
                let d_i = dc * gg[i];
                let d_g = dc * gi[i];
                gc_prev[i] = dc * gf[i];

                da[0][i] = d_i * gi[i] * (1.0 - gi[i]);
                da[1][i] = d_f * gf[i] * (1.0 - gf[i]);
                da[2][i] = d_g * (1.0 - gg[i] * gg[i]);
                da[3][i] = d_o * go[i] * (1.0 - go[i]);
            }
            for (g, gate) in l.gates.iter().enumerate() {
                let dag = &da[g];
                for i in 0..hd {
                    let v = dag[i];
                    if v == 0.0 {
                        continue;
                    }
                    grad[gate.b + i] += weight * v;
                    for (j, &xj) in x.iter().enumerate().take(d) {
                        grad[gate.w_x + i * d + j] += weight * v * xj;
                    }
                    for j in 0..hd {
                        grad[gate.w_h + i * hd + j] += weight * v * h_prev[j];
                        gh_prev[j] += p[gate.w_h + i * hd + j] * v;
                    }
                }
            }
            std::mem::swap(&mut gh, &mut gh_prev);
            std::mem::swap(&mut gc, &mut gc_prev);
        }
        cross_entropy(&cache.probs, sample.label)
    }

    fn loss_of(&self, sample: &LabeledWindow) -> f64 {
        cross_entropy(self.predict(&sample.window()).as_slice(), sample.label)
    }
}

/// Compare the analytic gradient of one sample's loss against central finite
/// differences over every parameter. Returns the worst relative error.
pub fn gradient_check(model: &RecurrentModel, sample: &LabeledWindow) -> f64 {
    const STEP: f64 = 1e-5;
    let cache = model.forward_cached(sample);
    let mut analytic = vec![0.0; model.num_params()];
    model.backward(sample, &cache, 1.0, &mut analytic);

    let mut probe = model.clone();
    let mut worst: f64 = 0.0;
    for i in 0..probe.params.len() {
        let original = probe.params[i];
        probe.params[i] = original + STEP;
        let plus = probe.loss_of(sample);
        probe.params[i] = original - STEP;
        let minus = probe.loss_of(sample);
        probe.params[i] = original;
        let numeric = (plus - minus) / (2.0 * STEP);
        let rel = (analytic[i] - numeric).abs() / analytic[i].abs().max(numeric.abs()).max(1e-6);
        worst = worst.max(rel);
    }
    worst
}

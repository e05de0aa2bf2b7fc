use rand::Rng;
use riga_core::{derive_seed, rng_from_seed};
use riga_nn::linalg::gemm;
use riga_nn::Optimizer;
use serde::{Deserialize, Serialize};

use crate::cgan::N_CLASSES;
use crate::error::{GenError, Result};
use crate::images::epoch_batches;
use crate::log::TrainingLog;
use crate::prior::sample_categorical;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransformerConfig {
    pub width: usize,
    pub heads: usize,
    pub layers: usize,
    pub mlp_width: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for TransformerConfig {
    fn default() -> Self {
        Self { width: 64, heads: 4, layers: 2, mlp_width: 128, epochs: 50, batch_size: 32, learning_rate: 1e-3, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct BlockOffsets {
    wq: usize,
    wk: usize,
    wv: usize,
    wo: usize,
    w1: usize,
    b1: usize,
    w2: usize,
    b2: usize,
}

/// Decoder-only causal transformer over flattened code sequences.
///
/// Position 0 holds a class token; position `t > 0` holds code `t - 1`;
/// the output at position `t` predicts code `t`. Each block is
/// `x + attn(x)` followed by `h + mlp(h)` with a ReLU MLP and no
/// normalization. Matrices are stored `[in][out]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformerPrior {
    pub config: TransformerConfig,
    pub k: usize,
    pub len: usize,
    params: Vec<f64>,
    embed: usize,
    pos: usize,
    blocks: Vec<BlockOffsets>,
    w_out: usize,
    b_out: usize,
}

struct BlockCache {
    x: Vec<f64>,
    q: Vec<f64>,
    kk: Vec<f64>,
    v: Vec<f64>,
    attn: Vec<f64>,
    o: Vec<f64>,
    h1: Vec<f64>,
    u: Vec<f64>,
    r: Vec<f64>,
}

struct SeqCache {
    tokens: Vec<usize>,
    blocks: Vec<BlockCache>,
    last: Vec<f64>,
    logits: Vec<f64>,
}

fn add_bias(m: &mut [f64], b: &[f64]) {
    for row in m.chunks_mut(b.len()) {
        for (v, bb) in row.iter_mut().zip(b) {
            *v += bb;
        }
    }
}

fn col_sum_into(m: &[f64], cols: usize, out: &mut [f64]) {
    for row in m.chunks(cols) {
        for (o, v) in out.iter_mut().zip(row) {
            *o += v;
        }
    }
}

impl TransformerPrior {
    pub fn new(k: usize, positions: usize, config: TransformerConfig) -> Result<Self> {
        let w = config.width;
        if config.heads == 0 || w % config.heads != 0 || config.layers == 0 || k < 2 || positions == 0 {
            return Err(GenError::InvalidArgument("width must split evenly across heads; k >= 2; layers >= 1".into()));
        }
        let mut next = 0usize;
        let mut take = |n: usize| {
            let at = next;
            next += n;
            at
        };
        let embed = take((k + N_CLASSES) * w);
        let pos = take(positions * w);
        let m = config.mlp_width;
        let blocks: Vec<BlockOffsets> = (0..config.layers)
            .map(|_| BlockOffsets {
                wq: take(w * w),
                wk: take(w * w),
                wv: take(w * w),
                wo: take(w * w),
                w1: take(w * m),
                b1: take(m),
                w2: take(m * w),
                b2: take(w),
            })
            .collect();
        let w_out = take(w * k);
        let b_out = take(k);
        let mut rng = rng_from_seed(derive_seed(config.seed, "prior.transformer"));
        let mut params = vec![0.0; next];
        let mut fill = |at: usize, n: usize, bound: f64, params: &mut Vec<f64>| {
            for v in &mut params[at..at + n] {
                *v = rng.random_range(-bound..bound);
            }
        };
        fill(embed, (k + N_CLASSES) * w, 0.5, &mut params);
        fill(pos, positions * w, 0.1, &mut params);
        let depth = (2.0 * config.layers as f64).sqrt();
        for b in &blocks {
            let bw = (3.0 / w as f64).sqrt();
            fill(b.wq, w * w, bw, &mut params);
            fill(b.wk, w * w, bw, &mut params);
            fill(b.wv, w * w, bw, &mut params);
            fill(b.wo, w * w, bw / depth, &mut params);
            fill(b.w1, w * m, (6.0 / w as f64).sqrt(), &mut params);
            fill(b.w2, m * w, (3.0 / m as f64).sqrt() / depth, &mut params);
        }
        fill(w_out, w * k, (3.0 / w as f64).sqrt(), &mut params);
        Ok(Self { config, k, len: positions, params, embed, pos, blocks, w_out, b_out })
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn p(&self, at: usize, n: usize) -> &[f64] {
        &self.params[at..at + n]
    }

    /// Input token ids: the class token then the first `len - 1` codes.
    fn tokens(&self, codes: &[usize], label: u8) -> Vec<usize> {
        let mut t = Vec::with_capacity(self.len);
        t.push(self.k + label as usize);
        t.extend_from_slice(&codes[..self.len - 1]);
        t
    }

    fn forward_seq(&self, codes: &[usize], label: u8) -> SeqCache {
        let (w, t_len, m, k) = (self.config.width, self.len, self.config.mlp_width, self.k);
        let heads = self.config.heads;
        let dh = w / heads;
        let scale = 1.0 / (dh as f64).sqrt();
        let tokens = self.tokens(codes, label);
        let mut x = vec![0.0; t_len * w];
        for (t, &tok) in tokens.iter().enumerate() {
            let e = self.p(self.embed + tok * w, w);
            let p = self.p(self.pos + t * w, w);
            for c in 0..w {
                x[t * w + c] = e[c] + p[c];
            }
        }
        let mut blocks = Vec::with_capacity(self.blocks.len());
        for b in &self.blocks {
            let mut q = vec![0.0; t_len * w];
            let mut kk = vec![0.0; t_len * w];
            let mut v = vec![0.0; t_len * w];
            gemm(t_len, w, w, &x, false, self.p(b.wq, w * w), false, &mut q, 0.0);
            gemm(t_len, w, w, &x, false, self.p(b.wk, w * w), false, &mut kk, 0.0);
            gemm(t_len, w, w, &x, false, self.p(b.wv, w * w), false, &mut v, 0.0);
            let mut attn = vec![0.0; heads * t_len * t_len];
            let mut o = vec![0.0; t_len * w];
            for h in 0..heads {
                let off = h * dh;
                for i in 0..t_len {
                    let row = &mut attn[(h * t_len + i) * t_len..(h * t_len + i + 1) * t_len];
                    let mut max = f64::NEG_INFINITY;
                    for j in 0..=i {
                        let s: f64 = (0..dh).map(|c| q[i * w + off + c] * kk[j * w + off + c]).sum::<f64>() * scale;
                        row[j] = s;
                        max = max.max(s);
                    }
                    let mut sum = 0.0;
                    for s in row.iter_mut().take(i + 1) {
                        *s = (*s - max).exp();
                        sum += *s;
                    }
                    for j in 0..=i {
                        row[j] /= sum;
                        let a = row[j];
                        for c in 0..dh {
                            o[i * w + off + c] += a * v[j * w + off + c];
                        }
                    }
                }
            }
            let mut h1 = x.clone();
            gemm(t_len, w, w, &o, false, self.p(b.wo, w * w), false, &mut h1, 1.0);
            let mut u = vec![0.0; t_len * m];
            gemm(t_len, w, m, &h1, false, self.p(b.w1, w * m), false, &mut u, 0.0);
            add_bias(&mut u, self.p(b.b1, m));
            let r: Vec<f64> = u.iter().map(|&z| z.max(0.0)).collect();
            let mut next = h1.clone();
            gemm(t_len, m, w, &r, false, self.p(b.w2, m * w), false, &mut next, 1.0);
            add_bias(&mut next, self.p(b.b2, w));
            blocks.push(BlockCache { x, q, kk, v, attn, o, h1, u, r });
            x = next;
        }
        let mut logits = vec![0.0; t_len * k];
        gemm(t_len, w, k, &x, false, self.p(self.w_out, w * k), false, &mut logits, 0.0);
        add_bias(&mut logits, self.p(self.b_out, k));
        SeqCache { tokens, blocks, last: x, logits }
    }

    /// Logits `[len][k]` for one sequence.
    pub fn logits(&self, codes: &[usize], label: u8) -> Vec<f64> {
        self.forward_seq(codes, label).logits
    }

    fn softmax_rows(logits: &[f64], k: usize) -> Vec<f64> {
        let mut out = logits.to_vec();
        for row in out.chunks_mut(k) {
            let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mut sum = 0.0;
            for v in row.iter_mut() {
                *v = (*v - max).exp();
                sum += *v;
            }
            for v in row.iter_mut() {
                *v /= sum;
            }
        }
        out
    }

    /// Mean per-code cross-entropy over a batch and its parameter gradient.
    pub fn loss_and_grad(&self, codes: &[&[usize]], labels: &[u8]) -> (f64, Vec<f64>) {
        let (w, t_len, m, k) = (self.config.width, self.len, self.config.mlp_width, self.k);
        let heads = self.config.heads;
        let dh = w / heads;
        let scale = 1.0 / (dh as f64).sqrt();
        let norm = 1.0 / (codes.len() * t_len) as f64;
        let mut grad = vec![0.0; self.params.len()];
        let mut loss = 0.0;
        for (seq, &label) in codes.iter().zip(labels) {
            let cache = self.forward_seq(seq, label);
            let probs = Self::softmax_rows(&cache.logits, k);
            let mut dlogits = probs.clone();
            for t in 0..t_len {
                loss -= probs[t * k + seq[t]].ln();
                dlogits[t * k + seq[t]] -= 1.0;
            }
            for v in &mut dlogits {
                *v *= norm;
            }
            gemm(w, t_len, k, &cache.last, true, &dlogits, false, &mut grad[self.w_out..self.w_out + w * k], 1.0);
            col_sum_into(&dlogits, k, &mut grad[self.b_out..self.b_out + k]);
            let mut dx = vec![0.0; t_len * w];
            gemm(t_len, k, w, &dlogits, false, self.p(self.w_out, w * k), true, &mut dx, 0.0);
            for (b, c) in self.blocks.iter().zip(&cache.blocks).rev() {
                // MLP branch.
                gemm(m, t_len, w, &c.r, true, &dx, false, &mut grad[b.w2..b.w2 + m * w], 1.0);
                col_sum_into(&dx, w, &mut grad[b.b2..b.b2 + w]);
                let mut du = vec![0.0; t_len * m];
                gemm(t_len, w, m, &dx, false, self.p(b.w2, m * w), true, &mut du, 0.0);
                for (d, &z) in du.iter_mut().zip(&c.u) {
                    if z <= 0.0 {
                        *d = 0.0;
                    }
                }
                gemm(w, t_len, m, &c.h1, true, &du, false, &mut grad[b.w1..b.w1 + w * m], 1.0);
                col_sum_into(&du, m, &mut grad[b.b1..b.b1 + m]);
                let mut dh1 = dx;
                gemm(t_len, m, w, &du, false, self.p(b.w1, w * m), true, &mut dh1, 1.0);
                // Attention branch.
                gemm(w, t_len, w, &c.o, true, &dh1, false, &mut grad[b.wo..b.wo + w * w], 1.0);
                let mut d_o = vec![0.0; t_len * w];
                gemm(t_len, w, w, &dh1, false, self.p(b.wo, w * w), true, &mut d_o, 0.0);
                let mut dq = vec![0.0; t_len * w];
                let mut dk = vec![0.0; t_len * w];
                let mut dv = vec![0.0; t_len * w];
                let mut da = vec![0.0; t_len];
                for h in 0..heads {
                    let off = h * dh;
                    for i in 0..t_len {
                        let a = &c.attn[(h * t_len + i) * t_len..(h * t_len + i + 1) * t_len];
                        let mut dot = 0.0;
                        for j in 0..=i {
                            da[j] = (0..dh).map(|e| d_o[i * w + off + e] * c.v[j * w + off + e]).sum();
                            dot += a[j] * da[j];
                            for e in 0..dh {
                                dv[j * w + off + e] += a[j] * d_o[i * w + off + e];
                            }
                        }
                        for j in 0..=i {
                            let ds = a[j] * (da[j] - dot) * scale;
                            for e in 0..dh {
                                dq[i * w + off + e] += ds * c.kk[j * w + off + e];
                                dk[j * w + off + e] += ds * c.q[i * w + off + e];
                            }
                        }
                    }
                }
                gemm(w, t_len, w, &c.x, true, &dq, false, &mut grad[b.wq..b.wq + w * w], 1.0);
                gemm(w, t_len, w, &c.x, true, &dk, false, &mut grad[b.wk..b.wk + w * w], 1.0);
                gemm(w, t_len, w, &c.x, true, &dv, false, &mut grad[b.wv..b.wv + w * w], 1.0);
                let mut dxp = dh1;
                gemm(t_len, w, w, &dq, false, self.p(b.wq, w * w), true, &mut dxp, 1.0);
                gemm(t_len, w, w, &dk, false, self.p(b.wk, w * w), true, &mut dxp, 1.0);
                gemm(t_len, w, w, &dv, false, self.p(b.wv, w * w), true, &mut dxp, 1.0);
                dx = dxp;
            }
            for (t, &tok) in cache.tokens.iter().enumerate() {
                for c in 0..w {
                    grad[self.embed + tok * w + c] += dx[t * w + c];
                    grad[self.pos + t * w + c] += dx[t * w + c];
                }
            }
        }
        (loss * norm, grad)
    }

    /// Ancestral sampling of `count` code sequences for class `label`.
    pub fn sample(&self, label: u8, count: usize, rng: &mut impl Rng) -> Vec<Vec<usize>> {
        let k = self.k;
        (0..count)
            .map(|_| {
                let mut seq = vec![0usize; self.len];
                for t in 0..self.len {
                    let logits = self.forward_seq(&seq, label).logits;
                    let probs = Self::softmax_rows(&logits[t * k..(t + 1) * k], k);
                    seq[t] = sample_categorical(&probs, rng);
                }
                seq
            })
            .collect()
    }
}

pub fn transformer_train(k: usize, codes: &[Vec<usize>], labels: &[u8], config: &TransformerConfig) -> Result<(TransformerPrior, TrainingLog)> {
    if codes.is_empty() || codes.len() != labels.len() || config.epochs == 0 {
        return Err(GenError::InvalidArgument("prior training needs labelled code sequences and at least one epoch".into()));
    }
    let len = codes[0].len();
    if codes.iter().any(|c| c.len() != len || c.iter().any(|&v| v >= k)) {
        return Err(GenError::InvalidArgument("code sequences must be equally long with codes below k".into()));
    }
    let mut prior = TransformerPrior::new(k, len, config.clone())?;
    let mut opt = Optimizer::adam(config.learning_rate, 0.9, 0.999);
    let mut rng = rng_from_seed(derive_seed(config.seed, "prior.transformer.train"));
    let mut log = TrainingLog::new(&["nll_per_code"]);
    for epoch in 0..config.epochs {
        let (mut sum, mut seen) = (0.0, 0usize);
        for batch in epoch_batches(codes.len(), config.batch_size, &mut rng) {
            let refs: Vec<&[usize]> = batch.iter().map(|&i| codes[i].as_slice()).collect();
            let ys: Vec<u8> = batch.iter().map(|&i| labels[i]).collect();
            let (l, g) = prior.loss_and_grad(&refs, &ys);
            if !l.is_finite() {
                return Err(GenError::NonFiniteLoss { epoch });
            }
            opt.step(&mut prior.params, &g)?;
            sum += l * batch.len() as f64;
            seen += batch.len();
        }
        log.push(vec![sum / seen as f64]);
    }
    Ok((prior, log))
}

use serde::{Deserialize, Serialize};

use crate::error::{NnError, Result};
use crate::tensor::Tensor;

const PROB_EPS: f64 = 1e-12;

/// Batch-mean losses.
///
/// - `Mse`: mean squared error over every element.
/// - `Bce`: binary cross-entropy on probabilities (clamped to `[1e-12, 1 - 1e-12]`).
/// - `Ce`: softmax cross-entropy over the channel axis (axis 1) of logits;
///   the target holds class indices with the channel axis removed, and the
///   loss is averaged over every position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Loss {
    Bce,
    Ce,
    Mse,
}

impl Loss {
    /// Mean loss and its gradient with respect to `pred`.
    pub fn evaluate(self, pred: &Tensor, target: &Tensor) -> Result<(f64, Tensor)> {
        let batch = pred.batch();
        let per_sample = match self {
            Loss::Mse | Loss::Bce => {
                if pred.shape() != target.shape() {
                    return Err(NnError::Mismatch { expected: pred.shape().to_vec(), actual: target.shape().to_vec() });
                }
                self.elementwise(pred, target)
            }
            Loss::Ce => {
                let mut expected = vec![batch];
                expected.extend_from_slice(&pred.shape()[2..]);
                if pred.shape().len() < 2 || target.shape() != &expected[..] {
                    return Err(NnError::Mismatch { expected, actual: target.shape().to_vec() });
                }
                softmax_ce(pred, target)?
            }
        };
        let (losses, grad) = per_sample;
        for (index, l) in losses.iter().enumerate() {
            if !l.is_finite() {
                return Err(NnError::NonFiniteLoss { index });
            }
        }
        let mean = losses.iter().sum::<f64>() / batch as f64;
        Ok((mean, grad))
    }

    fn elementwise(self, pred: &Tensor, target: &Tensor) -> (Vec<f64>, Tensor) {
        let batch = pred.batch();
        let per = pred.sample_len();
        let scale = 1.0 / (batch * per) as f64;
        let mut losses = vec![0.0; batch];
        let mut grad = Tensor::zeros(pred.shape().to_vec());
        for b in 0..batch {
            let p = pred.sample(b);
            let t = target.sample(b);
            let g = grad.sample_mut(b);
            let mut acc = 0.0;
            for i in 0..per {
                match self {
                    Loss::Mse => {
                        let d = p[i] - t[i];
                        acc += d * d;
                        g[i] = 2.0 * d * scale;
                    }
                    Loss::Bce => {
                        let q = p[i].clamp(PROB_EPS, 1.0 - PROB_EPS);
                        acc -= t[i] * q.ln() + (1.0 - t[i]) * (1.0 - q).ln();
                        g[i] = (q - t[i]) / (q * (1.0 - q)) * scale;
                    }
                    Loss::Ce => unreachable!(),
                }
            }
            losses[b] = acc / per as f64;
        }
        (losses, grad)
    }
}

fn softmax_ce(pred: &Tensor, target: &Tensor) -> Result<(Vec<f64>, Tensor)> {
    let batch = pred.batch();
    let channels = pred.shape()[1];
    let positions: usize = pred.shape()[2..].iter().product();
    let scale = 1.0 / (batch * positions) as f64;
    let mut losses = vec![0.0; batch];
    let mut grad = Tensor::zeros(pred.shape().to_vec());
    let mut probs = vec![0.0; channels];
    for b in 0..batch {
        let z = pred.sample(b);
        let t = target.sample(b);
        let g = grad.sample_mut(b);
        let mut acc = 0.0;
        for pos in 0..positions {
            let class = t[pos];
            if class < 0.0 || class.fract() != 0.0 || class as usize >= channels {
                return Err(NnError::Mismatch { expected: vec![channels], actual: vec![class as usize] });
            }
            let class = class as usize;
            let max = (0..channels).map(|c| z[c * positions + pos]).fold(f64::NEG_INFINITY, f64::max);
            let mut sum = 0.0;
            for c in 0..channels {
                probs[c] = (z[c * positions + pos] - max).exp();
                sum += probs[c];
            }
            acc -= z[class * positions + pos] - max - sum.ln();
            for c in 0..channels {
                let p = probs[c] / sum;
                g[c * positions + pos] = (p - if c == class { 1.0 } else { 0.0 }) * scale;
            }
        }
        losses[b] = acc / positions as f64;
    }
    Ok((losses, grad))
}

/// Softmax over axis 1 of a `[batch, channels, ...]` tensor.
pub fn softmax_channels(logits: &Tensor) -> Tensor {
    let batch = logits.batch();
    let channels = logits.shape()[1];
    let positions: usize = logits.shape()[2..].iter().product();
    let mut out = Tensor::zeros(logits.shape().to_vec());
    for b in 0..batch {
        let z = logits.sample(b);
        let o = out.sample_mut(b);
        for pos in 0..positions {
            let max = (0..channels).map(|c| z[c * positions + pos]).fold(f64::NEG_INFINITY, f64::max);
            let mut sum = 0.0;
            for c in 0..channels {
                let e = (z[c * positions + pos] - max).exp();
                o[c * positions + pos] = e;
                sum += e;
            }
            for c in 0..channels {
                o[c * positions + pos] /= sum;
            }
        }
    }
    out
}

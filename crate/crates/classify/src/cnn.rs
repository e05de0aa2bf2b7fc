//! Small convolutional classifier over mapped images.

use riga_core::{rng_from_seed, Image};
use riga_genmodels::images::{epoch_batches, to_tensor};
use riga_nn::{Activation, LayerSpec, Loss, Network, NetworkSpec, NnError, Optimizer, Tensor};
use serde::{Deserialize, Serialize};

use crate::error::{ClassifyError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvBlock {
    pub channels: usize,
    pub kernel: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CnnConfig {
    /// Each block is a stride-2 convolution with "same"-style padding and ReLU.
    pub blocks: Vec<ConvBlock>,
    pub dense: Vec<usize>,
    pub batch_size: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for CnnConfig {
    fn default() -> Self {
        Self {
            blocks: vec![ConvBlock { channels: 16, kernel: 3 }, ConvBlock { channels: 32, kernel: 3 }],
            dense: vec![64],
            batch_size: 32,
            epochs: 20,
            learning_rate: 1e-3,
            seed: 0,
        }
    }
}

impl CnnConfig {
    pub fn validate(&self) -> Result<()> {
        if self.blocks.is_empty() || self.dense.is_empty() {
            return Err(ClassifyError::InvalidArgument("cnn needs at least one conv block and one dense layer".into()));
        }
        if self.batch_size == 0 || self.blocks.iter().any(|b| b.channels == 0 || b.kernel == 0) || self.dense.contains(&0) {
            return Err(ClassifyError::InvalidArgument("cnn sizes must be positive".into()));
        }
        if !(self.learning_rate >= 0.0) {
            return Err(ClassifyError::InvalidArgument("learning rate must be non-negative".into()));
        }
        Ok(())
    }

    pub fn network_spec(&self, side: usize) -> Result<NetworkSpec> {
        self.validate()?;
        let mut layers = Vec::new();
        let (mut ch, mut s) = (1, side);
        for b in &self.blocks {
            let pad = b.kernel / 2;
            if s + 2 * pad < b.kernel {
                return Err(ClassifyError::InvalidArgument(format!("image side {side} too small for {} conv blocks", self.blocks.len())));
            }
            layers.push(LayerSpec::Conv2d { in_ch: ch, out_ch: b.channels, kernel: b.kernel, stride: 2, pad });
            layers.push(LayerSpec::Activation(Activation::Relu));
            ch = b.channels;
            s = (s + 2 * pad - b.kernel) / 2 + 1;
        }
        layers.push(LayerSpec::Flatten);
        let mut width = ch * s * s;
        for &w in &self.dense {
            layers.push(LayerSpec::Dense { input: width, output: w });
            layers.push(LayerSpec::Activation(Activation::Relu));
            width = w;
        }
        layers.push(LayerSpec::Dense { input: width, output: 2 });
        Ok(NetworkSpec::new(vec![1, side, side], layers, self.seed))
    }
}

#[derive(Debug, Clone)]
pub struct Cnn {
    pub net: Network,
    pub side: usize,
    /// Mean training loss per epoch.
    pub losses: Vec<f64>,
}

const PREDICT_CHUNK: usize = 256;

impl Cnn {
    /// Positive-class probabilities.
    pub fn predict_proba(&self, images: &[Image]) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(images.len());
        for chunk in images.chunks(PREDICT_CHUNK) {
            let refs: Vec<&Image> = chunk.iter().collect();
            check_side(&refs, self.side)?;
            let logits = self.net.predict(&to_tensor(&refs, self.side))?;
            for b in 0..chunk.len() {
                let l = logits.sample(b);
                out.push(riga_nn::layers::sigmoid(l[1] - l[0]));
            }
        }
        Ok(out)
    }
}

fn check_side(images: &[&Image], side: usize) -> Result<()> {
    match images.iter().find(|im| im.grid_size != side || im.pixels.len() != side * side) {
        Some(im) => Err(ClassifyError::InvalidArgument(format!("image of side {} where {side} expected", im.grid_size))),
        None => Ok(()),
    }
}

/// Trains with mean softmax cross-entropy over two logits and Adam.
pub fn cnn_train(train: &[Image], cfg: &CnnConfig) -> Result<Cnn> {
    let first = train.first().ok_or(ClassifyError::SingleClass)?;
    let side = first.grid_size;
    let refs: Vec<&Image> = train.iter().collect();
    check_side(&refs, side)?;
    if !train.iter().any(|im| im.label == 0) || !train.iter().any(|im| im.label == 1) {
        return Err(ClassifyError::SingleClass);
    }
    let mut net = Network::new(cfg.network_spec(side)?)?;
    let mut opt = Optimizer::adam(cfg.learning_rate, 0.9, 0.999);
    let mut rng = rng_from_seed(riga_core::derive_seed(cfg.seed, "cnn.batches"));
    let mut losses = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let mut total = 0.0;
        for batch in epoch_batches(train.len(), cfg.batch_size, &mut rng) {
            let ims: Vec<&Image> = batch.iter().map(|&i| &train[i]).collect();
            let x = to_tensor(&ims, side);
            let y = Tensor::new(vec![ims.len()], ims.iter().map(|im| im.label as f64).collect())?;
            let l = riga_nn::train_step(&mut net, Loss::Ce, &x, &y, &mut opt).map_err(|e| match e {
                NnError::NonFiniteLoss { .. } | NnError::NonFinite { .. } => ClassifyError::NonFiniteLoss { epoch },
                other => other.into(),
            })?;
            total += l * ims.len() as f64;
        }
        let mean = total / train.len() as f64;
        if !mean.is_finite() {
            return Err(ClassifyError::NonFiniteLoss { epoch });
        }
        losses.push(mean);
    }
    Ok(Cnn { net, side, losses })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_spec_shapes() {
        let spec = CnnConfig::default().network_spec(28).unwrap();
        assert_eq!(spec.shapes().unwrap().last().unwrap(), &vec![2]);
    }

    #[test]
    fn rejects_empty_head() {
        let cfg = CnnConfig { dense: vec![], ..Default::default() };
        assert!(cfg.validate().is_err());
    }
}

use rand::Rng;
use riga_core::{derive_seed, rng_from_seed};
use riga_nn::{softmax_channels, Activation, LayerSpec, Loss, MaskType, Network, NetworkSpec, Optimizer, Tensor};
use serde::{Deserialize, Serialize};

use crate::cgan::N_CLASSES;
use crate::codebook::CodeBook;
use crate::error::{GenError, Result};
use crate::images::epoch_batches;
use crate::log::TrainingLog;
use crate::vqvae::nonfinite;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PriorConfig {
    pub channels: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for PriorConfig {
    fn default() -> Self {
        Self { channels: 64, epochs: 50, batch_size: 32, learning_rate: 1e-3, seed: 0 }
    }
}

/// Draws an index from a discrete distribution by inverse CDF.
pub(crate) fn sample_categorical(probs: &[f64], rng: &mut impl Rng) -> usize {
    let u: f64 = rng.random::<f64>() * probs.iter().sum::<f64>();
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

/// Class-conditional autoregressive model over a square code grid in raster
/// order: a type-A masked 3×3 convolution, a type-B 3×3 convolution and a
/// type-B 1×1 convolution to `k` logits. Codes enter as their codebook
/// vectors; the class enters as constant one-hot planes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PixelCnnPrior {
    pub side: usize,
    pub k: usize,
    pub embed_dim: usize,
    pub net: Network,
}

impl PixelCnnPrior {
    pub fn new(side: usize, codebook: &CodeBook, config: &PriorConfig) -> Result<Self> {
        let (k, d, ch) = (codebook.k(), codebook.dim(), config.channels);
        let net = Network::new(NetworkSpec::new(
            vec![d + N_CLASSES, side, side],
            vec![
                LayerSpec::MaskedConv2d { in_ch: d + N_CLASSES, out_ch: ch, kernel: 3, mask: MaskType::A, cond_ch: N_CLASSES },
                LayerSpec::Activation(Activation::Relu),
                LayerSpec::MaskedConv2d { in_ch: ch, out_ch: ch, kernel: 3, mask: MaskType::B, cond_ch: 0 },
                LayerSpec::Activation(Activation::Relu),
                LayerSpec::MaskedConv2d { in_ch: ch, out_ch: k, kernel: 1, mask: MaskType::B, cond_ch: 0 },
            ],
            derive_seed(config.seed, "prior.pixelcnn"),
        ))?;
        Ok(Self { side, k, embed_dim: d, net })
    }

    pub fn positions(&self) -> usize {
        self.side * self.side
    }

    /// Network input for code grids and their classes.
    pub fn input(&self, codebook: &CodeBook, codes: &[&[usize]], labels: &[u8]) -> Tensor {
        let hw = self.positions();
        let d = self.embed_dim;
        let mut t = Tensor::zeros(vec![codes.len(), d + N_CLASSES, self.side, self.side]);
        for (b, grid) in codes.iter().enumerate() {
            let s = t.sample_mut(b);
            for (pos, &code) in grid.iter().enumerate() {
                for (c, &v) in codebook.entry(code).iter().enumerate() {
                    s[c * hw + pos] = v;
                }
            }
            let plane = d + labels[b] as usize;
            s[plane * hw..(plane + 1) * hw].fill(1.0);
        }
        t
    }

    /// Logits `[n, k, side, side]`.
    pub fn logits(&self, codebook: &CodeBook, codes: &[&[usize]], labels: &[u8]) -> Result<Tensor> {
        Ok(self.net.predict(&self.input(codebook, codes, labels))?)
    }

    /// Total log-probability of each grid.
    pub fn log_prob(&self, codebook: &CodeBook, codes: &[&[usize]], labels: &[u8]) -> Result<Vec<f64>> {
        let probs = softmax_channels(&self.logits(codebook, codes, labels)?);
        let hw = self.positions();
        Ok(codes
            .iter()
            .enumerate()
            .map(|(b, grid)| grid.iter().enumerate().map(|(pos, &c)| probs.sample(b)[c * hw + pos].ln()).sum())
            .collect())
    }

    /// Ancestral sampling in raster order.
    pub fn sample(&self, codebook: &CodeBook, label: u8, count: usize, rng: &mut impl Rng) -> Result<Vec<Vec<usize>>> {
        let hw = self.positions();
        let mut grids = vec![vec![0usize; hw]; count];
        let labels = vec![label; count];
        let mut probs = vec![0.0; self.k];
        for pos in 0..hw {
            let refs: Vec<&[usize]> = grids.iter().map(|g| g.as_slice()).collect();
            let p = softmax_channels(&self.logits(codebook, &refs, &labels)?);
            for (b, grid) in grids.iter_mut().enumerate() {
                for (c, v) in probs.iter_mut().enumerate() {
                    *v = p.sample(b)[c * hw + pos];
                }
                grid[pos] = sample_categorical(&probs, rng);
            }
        }
        Ok(grids)
    }
}

/// Fits the prior by cross-entropy on (code grid, class) pairs.
pub fn prior_train(codebook: &CodeBook, codes: &[Vec<usize>], labels: &[u8], config: &PriorConfig) -> Result<(PixelCnnPrior, TrainingLog)> {
    if codes.is_empty() || codes.len() != labels.len() || config.epochs == 0 {
        return Err(GenError::InvalidArgument("prior training needs labelled code grids and at least one epoch".into()));
    }
    let side = (codes[0].len() as f64).sqrt() as usize;
    if side * side != codes[0].len() || codes.iter().any(|g| g.len() != side * side) {
        return Err(GenError::InvalidArgument("code grids must be square and equally sized".into()));
    }
    let mut prior = PixelCnnPrior::new(side, codebook, config)?;
    let mut opt = Optimizer::adam(config.learning_rate, 0.9, 0.999);
    let mut rng = rng_from_seed(derive_seed(config.seed, "prior.train"));
    let mut log = TrainingLog::new(&["nll_per_code"]);
    for epoch in 0..config.epochs {
        let (mut sum, mut seen) = (0.0, 0usize);
        for batch in epoch_batches(codes.len(), config.batch_size, &mut rng) {
            let refs: Vec<&[usize]> = batch.iter().map(|&i| codes[i].as_slice()).collect();
            let ys: Vec<u8> = batch.iter().map(|&i| labels[i]).collect();
            let x = prior.input(codebook, &refs, &ys);
            let target = Tensor::new(
                vec![batch.len(), side, side],
                refs.iter().flat_map(|g| g.iter().map(|&c| c as f64)).collect(),
            )?;
            let l = riga_nn::train_step(&mut prior.net, Loss::Ce, &x, &target, &mut opt)
                .map_err(GenError::from)
                .map_err(nonfinite(epoch))?;
            sum += l * batch.len() as f64;
            seen += batch.len();
        }
        log.push(vec![sum / seen as f64]);
    }
    Ok((prior, log))
}

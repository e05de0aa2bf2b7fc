use riga_core::{derive_seed, Image};
use riga_nn::{Activation, LayerSpec, Loss, Network, NetworkSpec, Optimizer, Tensor};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::images::common_side;
use crate::log::TrainingLog;
use crate::vqvae::{train_loop, BatchHook, VqForward, VqVae, VqvaeConfig};

pub const COLLAPSE_EPOCHS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VqganConfig {
    pub vq: VqvaeConfig,
    pub adversarial_weight: f64,
    pub disc_channels: usize,
    pub disc_learning_rate: f64,
}

impl Default for VqganConfig {
    fn default() -> Self {
        Self { vq: VqvaeConfig::default(), adversarial_weight: 0.1, disc_channels: 16, disc_learning_rate: 2e-4 }
    }
}

/// Three-convolution patch discriminator ending in one sigmoid score.
pub fn discriminator(side: usize, channels: usize, seed: u64) -> Result<Network> {
    let q = side / 4;
    Ok(Network::new(NetworkSpec::new(
        vec![1, side, side],
        vec![
            LayerSpec::Conv2d { in_ch: 1, out_ch: channels, kernel: 4, stride: 2, pad: 1 },
            LayerSpec::Activation(Activation::LeakyRelu),
            LayerSpec::Conv2d { in_ch: channels, out_ch: 2 * channels, kernel: 4, stride: 2, pad: 1 },
            LayerSpec::Activation(Activation::LeakyRelu),
            LayerSpec::Conv2d { in_ch: 2 * channels, out_ch: 1, kernel: q, stride: 1, pad: 0 },
            LayerSpec::Flatten,
            LayerSpec::Activation(Activation::Sigmoid),
        ],
        seed,
    ))?)
}

struct Adversary {
    net: Network,
    opt: Optimizer,
    weight: f64,
    epoch_correct: usize,
    epoch_total: usize,
    perfect_streak: usize,
    warned: bool,
}

impl BatchHook for Adversary {
    fn columns(&self) -> Vec<&'static str> {
        vec!["d_loss", "g_adv", "d_accuracy"]
    }

    fn on_batch(&mut self, x: &Tensor, fwd: &VqForward) -> Result<(Option<Tensor>, Vec<f64>)> {
        let n = x.batch();
        let recon = fwd.dec_trace.output();
        let mut grads = vec![0.0; self.net.param_count()];
        let mut d_loss = 0.0;
        let mut correct = 0;
        for (input, target) in [(x, 1.0), (recon, 0.0)] {
            let trace = self.net.forward(input)?;
            correct += trace.output().data().iter().filter(|&&p| (p > 0.5) == (target == 1.0)).count();
            let (l, g) = Loss::Bce.evaluate(trace.output(), &Tensor::filled(vec![n, 1], target))?;
            self.net.backward(&trace, &g, Some(&mut grads))?;
            d_loss += l;
        }
        self.epoch_correct += correct;
        self.epoch_total += 2 * n;
        // Generator term uses the discriminator before this batch's update.
        let trace = self.net.forward(recon)?;
        let (g_adv, g) = Loss::Bce.evaluate(trace.output(), &Tensor::filled(vec![n, 1], 1.0))?;
        let extra = if self.weight != 0.0 {
            let mut dx = self.net.backward(&trace, &g, None)?;
            for v in dx.data_mut() {
                *v *= self.weight;
            }
            Some(dx)
        } else {
            None
        };
        self.opt.step(self.net.params_mut(), &grads)?;
        Ok((extra, vec![d_loss, g_adv, correct as f64 / (2 * n) as f64]))
    }

    fn on_epoch_end(&mut self, epoch: usize, log: &mut TrainingLog) {
        if self.epoch_correct == self.epoch_total {
            self.perfect_streak += 1;
        } else {
            self.perfect_streak = 0;
        }
        self.epoch_correct = 0;
        self.epoch_total = 0;
        if self.perfect_streak >= COLLAPSE_EPOCHS && !self.warned {
            self.warned = true;
            log.warn(format!(
                "discriminator collapse: perfect real/fake accuracy for {COLLAPSE_EPOCHS} consecutive epochs (through epoch {})",
                epoch + 1
            ));
        }
    }
}

/// VQVAE objective plus `adversarial_weight` times a non-saturating
/// generator loss from a convolutional discriminator on reconstructions.
/// The discriminator is seeded independently, so weight 0 reproduces the
/// VQVAE run exactly.
pub fn vqgan_train(images: &[Image], config: &VqganConfig) -> Result<(VqVae, Network, TrainingLog)> {
    let side = common_side(images)?;
    let mut adv = Adversary {
        net: discriminator(side, config.disc_channels, derive_seed(config.vq.seed, "vqgan.discriminator"))?,
        opt: Optimizer::adam(config.disc_learning_rate, 0.5, 0.999),
        weight: config.adversarial_weight,
        epoch_correct: 0,
        epoch_total: 0,
        perfect_streak: 0,
        warned: false,
    };
    let (model, log) = train_loop(images, &config.vq, Some(&mut adv))?;
    Ok((model, adv.net, log))
}

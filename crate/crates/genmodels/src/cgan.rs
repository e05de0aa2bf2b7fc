use rand::Rng;
use rand_distr::StandardNormal;
use riga_core::{derive_seed, rng_from_seed, Image};
use riga_nn::{Activation, LayerSpec, Loss, Network, NetworkSpec, Optimizer, Tensor};
use serde::{Deserialize, Serialize};

use crate::error::{GenError, Result};
use crate::images::{common_side, epoch_batches, into_images, one_hot};
use crate::log::TrainingLog;

pub const NOISE_DIM: usize = 100;
pub const N_CLASSES: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CganConfig {
    pub noise_dim: usize,
    pub generator_hidden: Vec<usize>,
    pub discriminator_hidden: Vec<usize>,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub seed: u64,
}

impl Default for CganConfig {
    fn default() -> Self {
        Self {
            noise_dim: NOISE_DIM,
            generator_hidden: vec![512, 1024],
            discriminator_hidden: vec![1024, 512],
            epochs: 50,
            batch_size: 64,
            learning_rate: 2e-4,
            beta1: 0.5,
            seed: 0,
        }
    }
}

fn mlp(input: usize, hidden: &[usize], output: usize, act: Activation, head: Activation, seed: u64) -> Result<Network> {
    let mut layers = Vec::new();
    let mut width = input;
    for &h in hidden {
        layers.push(LayerSpec::Dense { input: width, output: h });
        layers.push(LayerSpec::Activation(act));
        width = h;
    }
    layers.push(LayerSpec::Dense { input: width, output });
    layers.push(LayerSpec::Activation(head));
    Ok(Network::new(NetworkSpec::new(vec![input], layers, seed))?)
}

/// Conditional GAN over flattened images. The class enters both networks
/// as a one-hot vector concatenated to their inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cgan {
    pub config: CganConfig,
    pub side: usize,
    pub generator: Network,
    pub discriminator: Network,
    g_opt: Optimizer,
    d_opt: Optimizer,
}

impl Cgan {
    pub fn new(config: CganConfig, side: usize) -> Result<Self> {
        let pixels = side * side;
        let generator = mlp(
            config.noise_dim + N_CLASSES,
            &config.generator_hidden,
            pixels,
            Activation::Relu,
            Activation::Sigmoid,
            derive_seed(config.seed, "cgan.generator"),
        )?;
        let discriminator = mlp(
            pixels + N_CLASSES,
            &config.discriminator_hidden,
            1,
            Activation::LeakyRelu,
            Activation::Sigmoid,
            derive_seed(config.seed, "cgan.discriminator"),
        )?;
        let g_opt = Optimizer::adam(config.learning_rate, config.beta1, 0.999);
        let d_opt = Optimizer::adam(config.learning_rate, config.beta1, 0.999);
        Ok(Self { config, side, generator, discriminator, g_opt, d_opt })
    }

    fn generator_input(&self, labels: &[u8], rng: &mut impl Rng) -> Tensor {
        let nd = self.config.noise_dim;
        let hot = one_hot(labels, N_CLASSES);
        let mut data = Vec::with_capacity(labels.len() * (nd + N_CLASSES));
        for i in 0..labels.len() {
            data.extend((0..nd).map(|_| rng.sample::<f64, _>(StandardNormal)));
            data.extend_from_slice(&hot[i * N_CLASSES..(i + 1) * N_CLASSES]);
        }
        Tensor::new(vec![labels.len(), nd + N_CLASSES], data).unwrap()
    }

    fn discriminator_input(&self, flat: &[f64], labels: &[u8]) -> Tensor {
        let p = self.side * self.side;
        let hot = one_hot(labels, N_CLASSES);
        let mut data = Vec::with_capacity(labels.len() * (p + N_CLASSES));
        for i in 0..labels.len() {
            data.extend_from_slice(&flat[i * p..(i + 1) * p]);
            data.extend_from_slice(&hot[i * N_CLASSES..(i + 1) * N_CLASSES]);
        }
        Tensor::new(vec![labels.len(), p + N_CLASSES], data).unwrap()
    }

    /// One discriminator update on a real batch and an equally sized fake
    /// batch with the same labels; returns the summed BCE.
    pub fn discriminator_step(&mut self, real: &[f64], labels: &[u8], rng: &mut impl Rng) -> Result<f64> {
        let n = labels.len();
        let fake = self.generator.predict(&self.generator_input(labels, rng))?;
        let mut grads = vec![0.0; self.discriminator.param_count()];
        let mut total = 0.0;
        for (flat, target) in [(real, 1.0), (fake.data(), 0.0)] {
            let x = self.discriminator_input(flat, labels);
            let trace = self.discriminator.forward(&x)?;
            let (l, g) = Loss::Bce.evaluate(trace.output(), &Tensor::filled(vec![n, 1], target))?;
            self.discriminator.backward(&trace, &g, Some(&mut grads))?;
            total += l;
        }
        self.d_opt.step(self.discriminator.params_mut(), &grads)?;
        Ok(total)
    }

    /// One generator update through the frozen discriminator.
    pub fn generator_step(&mut self, labels: &[u8], rng: &mut impl Rng) -> Result<f64> {
        let n = labels.len();
        let p = self.side * self.side;
        let z = self.generator_input(labels, rng);
        let g_trace = self.generator.forward(&z)?;
        let x = self.discriminator_input(g_trace.output().data(), labels);
        let d_trace = self.discriminator.forward(&x)?;
        let (l, g) = Loss::Bce.evaluate(d_trace.output(), &Tensor::filled(vec![n, 1], 1.0))?;
        let dx = self.discriminator.backward(&d_trace, &g, None)?;
        let mut d_img = Tensor::zeros(vec![n, p]);
        for i in 0..n {
            d_img.sample_mut(i).copy_from_slice(&dx.sample(i)[..p]);
        }
        let mut grads = vec![0.0; self.generator.param_count()];
        self.generator.backward(&g_trace, &d_img, Some(&mut grads))?;
        self.g_opt.step(self.generator.params_mut(), &grads)?;
        Ok(l)
    }

    /// Generates `count` images of class `label`, clamped to `[0, 1]`.
    pub fn generate(&self, label: u8, count: usize, seed: u64) -> Result<Vec<Image>> {
        if count == 0 {
            return Ok(Vec::new());
        }
        let mut rng = rng_from_seed(seed);
        let z = self.generator_input(&vec![label; count], &mut rng);
        let out = self.generator.predict(&z)?;
        let (images, clamped) = into_images(&out, self.side, label);
        if clamped > 0 {
            log::info!("cgan: clamped {clamped} generated pixel values");
        }
        Ok(images)
    }
}

/// Alternating discriminator / generator training with binary cross-entropy.
pub fn cgan_train(images: &[Image], config: &CganConfig) -> Result<(Cgan, TrainingLog)> {
    let side = common_side(images)?;
    let has = |c: u8| images.iter().any(|im| im.label == c);
    if !has(0) || !has(1) {
        return Err(GenError::InvalidArgument("cgan training needs both classes".into()));
    }
    if config.epochs == 0 {
        return Err(GenError::InvalidArgument("epochs must be at least 1".into()));
    }
    let mut model = Cgan::new(config.clone(), side)?;
    let mut rng = rng_from_seed(derive_seed(config.seed, "cgan.train"));
    let mut log = TrainingLog::new(&["d_loss", "g_loss"]);
    let p = side * side;
    for epoch in 0..config.epochs {
        let (mut d_sum, mut g_sum, mut steps) = (0.0, 0.0, 0);
        for batch in epoch_batches(images.len(), config.batch_size, &mut rng) {
            let labels: Vec<u8> = batch.iter().map(|&i| images[i].label).collect();
            let mut real = Vec::with_capacity(batch.len() * p);
            for &i in &batch {
                real.extend_from_slice(&images[i].pixels);
            }
            let nonfinite = |e: GenError| match e {
                GenError::Nn(riga_nn::NnError::NonFiniteLoss { .. } | riga_nn::NnError::NonFinite { .. }) => {
                    GenError::NonFiniteLoss { epoch }
                }
                other => other,
            };
            d_sum += model.discriminator_step(&real, &labels, &mut rng).map_err(nonfinite)?;
            g_sum += model.generator_step(&labels, &mut rng).map_err(nonfinite)?;
            steps += 1;
        }
        log.push(vec![d_sum / steps as f64, g_sum / steps as f64]);
    }
    Ok((model, log))
}

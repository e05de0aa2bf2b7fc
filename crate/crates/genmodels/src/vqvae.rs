use rand::seq::index::sample;
use riga_core::{derive_seed, rng_from_seed, Image};
use riga_nn::{Activation, LayerSpec, Loss, Network, NetworkSpec, Optimizer, Tensor, Trace};
use serde::{Deserialize, Serialize};

use crate::codebook::CodeBook;
use crate::error::{GenError, Result};
use crate::images::{common_side, epoch_batches, into_images, to_tensor};
use crate::log::TrainingLog;

pub const DEFAULT_CODEBOOK_SIZE: usize = 128;
pub const DEAD_CODE_LIMIT: f64 = 0.9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VqvaeConfig {
    pub hidden_channels: usize,
    pub code_dim: usize,
    pub codebook_size: usize,
    /// Commitment weight.
    pub beta: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Re-seed entries unused during an epoch from that epoch's encoder outputs.
    pub restart_dead_codes: bool,
    pub seed: u64,
}

impl Default for VqvaeConfig {
    fn default() -> Self {
        Self {
            hidden_channels: 32,
            code_dim: 16,
            codebook_size: DEFAULT_CODEBOOK_SIZE,
            beta: 0.25,
            epochs: 50,
            batch_size: 32,
            learning_rate: 1e-3,
            restart_dead_codes: true,
            seed: 0,
        }
    }
}

impl VqvaeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(GenError::InvalidArgument("epochs must be at least 1".into()));
        }
        if self.codebook_size < 2 {
            return Err(GenError::InvalidArgument("codebook needs at least 2 entries".into()));
        }
        if self.hidden_channels == 0 || self.code_dim == 0 || self.batch_size == 0 {
            return Err(GenError::InvalidArgument("channel counts and batch size must be positive".into()));
        }
        Ok(())
    }
}

/// Loss terms of one batch: reconstruction MSE, codebook term
/// `||sg(z_e) - c||^2`, commitment term `||z_e - sg(c)||^2` (unweighted) and
/// the weighted total.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VqLosses {
    pub recon: f64,
    pub codebook: f64,
    pub commitment: f64,
    pub total: f64,
}

/// Gradients of the composite loss for every parameter block, plus the
/// latent gradients on both sides of the quantizer.
#[derive(Debug, Clone)]
pub struct VqGrads {
    pub encoder: Vec<f64>,
    pub decoder: Vec<f64>,
    pub codebook: Vec<f64>,
    pub d_quantized: Tensor,
    pub d_latent: Tensor,
}

/// Quantities held fixed by the stop-gradient operators at a base point.
#[derive(Debug, Clone)]
pub struct FrozenPoint {
    pub assignments: Vec<usize>,
    pub latent: Tensor,
    pub quantized: Tensor,
    pub codebook: Vec<f64>,
}

/// Forward state kept for backward passes.
pub struct VqForward {
    pub enc_trace: Trace,
    pub assignments: Vec<usize>,
    pub quantized: Tensor,
    pub dec_trace: Trace,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VqVae {
    pub config: VqvaeConfig,
    pub side: usize,
    pub encoder: Network,
    pub decoder: Network,
    pub codebook: CodeBook,
}

impl VqVae {
    /// Encoder: two 4×4 stride-2 convolutions down to a `(side/4)²` map of
    /// `code_dim` channels. Decoder mirrors it with transposed convolutions
    /// and a sigmoid output.
    pub fn new(config: VqvaeConfig, side: usize) -> Result<Self> {
        config.validate()?;
        if side % 4 != 0 || side < 4 {
            return Err(GenError::InvalidArgument(format!("image side {side} must be a positive multiple of 4")));
        }
        let (c, d) = (config.hidden_channels, config.code_dim);
        let encoder = Network::new(NetworkSpec::new(
            vec![1, side, side],
            vec![
                LayerSpec::Conv2d { in_ch: 1, out_ch: c, kernel: 4, stride: 2, pad: 1 },
                LayerSpec::Activation(Activation::Relu),
                LayerSpec::Conv2d { in_ch: c, out_ch: d, kernel: 4, stride: 2, pad: 1 },
            ],
            derive_seed(config.seed, "vqvae.encoder"),
        ))?;
        let q = side / 4;
        let decoder = Network::new(NetworkSpec::new(
            vec![d, q, q],
            vec![
                LayerSpec::ConvTranspose2d { in_ch: d, out_ch: c, kernel: 4, stride: 2, pad: 1 },
                LayerSpec::Activation(Activation::Relu),
                LayerSpec::ConvTranspose2d { in_ch: c, out_ch: 1, kernel: 4, stride: 2, pad: 1 },
                LayerSpec::Activation(Activation::Sigmoid),
            ],
            derive_seed(config.seed, "vqvae.decoder"),
        ))?;
        let mut rng = rng_from_seed(derive_seed(config.seed, "vqvae.codebook"));
        let codebook = CodeBook::random(config.codebook_size, d, 1.0 / config.codebook_size as f64, &mut rng);
        Ok(Self { config, side, encoder, decoder, codebook })
    }

    pub fn code_side(&self) -> usize {
        self.side / 4
    }

    pub fn positions(&self) -> usize {
        self.code_side() * self.code_side()
    }

    /// Latent vector of sample `b` at position `pos` (channels are strided).
    fn latent_vector(&self, z: &Tensor, b: usize, pos: usize) -> Vec<f64> {
        let hw = self.positions();
        let s = z.sample(b);
        (0..self.config.code_dim).map(|c| s[c * hw + pos]).collect()
    }

    /// Nearest-code assignment for every latent position, raster order per sample.
    pub fn assign(&mut self, latent: &Tensor, record_usage: bool) -> Vec<usize> {
        let hw = self.positions();
        let mut out = Vec::with_capacity(latent.batch() * hw);
        for b in 0..latent.batch() {
            for pos in 0..hw {
                let v = self.latent_vector(latent, b, pos);
                let i = if record_usage { crate::codebook::vq_quantize(&v, &mut self.codebook).0 } else { self.codebook.nearest(&v).0 };
                out.push(i);
            }
        }
        out
    }

    /// Latent tensor built from codebook entries.
    pub fn embed_codes(&self, codes: &[usize], batch: usize) -> Tensor {
        let (hw, d) = (self.positions(), self.config.code_dim);
        let q = self.code_side();
        let mut t = Tensor::zeros(vec![batch, d, q, q]);
        for b in 0..batch {
            let s = t.sample_mut(b);
            for pos in 0..hw {
                let e = self.codebook.entry(codes[b * hw + pos]);
                for c in 0..d {
                    s[c * hw + pos] = e[c];
                }
            }
        }
        t
    }

    pub fn forward(&mut self, x: &Tensor, record_usage: bool) -> Result<VqForward> {
        let enc_trace = self.encoder.forward(x)?;
        let assignments = self.assign(enc_trace.output(), record_usage);
        let quantized = self.embed_codes(&assignments, x.batch());
        let dec_trace = self.decoder.forward(&quantized)?;
        Ok(VqForward { enc_trace, assignments, quantized, dec_trace })
    }

    /// Composite loss and gradients. `extra_output_grad` is added to the
    /// reconstruction gradient before it enters the decoder.
    pub fn backward(&self, x: &Tensor, fwd: &VqForward, extra_output_grad: Option<&Tensor>) -> Result<(VqLosses, VqGrads)> {
        let beta = self.config.beta;
        let (recon, mut g_out) = Loss::Mse.evaluate(fwd.dec_trace.output(), x)?;
        if let Some(extra) = extra_output_grad {
            for (g, e) in g_out.data_mut().iter_mut().zip(extra.data()) {
                *g += e;
            }
        }
        let mut decoder = vec![0.0; self.decoder.param_count()];
        let d_quantized = self.decoder.backward(&fwd.dec_trace, &g_out, Some(&mut decoder))?;
        let z_e = fwd.enc_trace.output();
        let z_q = &fwd.quantized;
        let n = z_e.len() as f64;
        let sq: f64 = z_e.data().iter().zip(z_q.data()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / n;
        // Straight-through: the decoder-input gradient is copied to the encoder output.
        let mut d_latent = d_quantized.clone();
        if beta != 0.0 {
            for ((g, a), b) in d_latent.data_mut().iter_mut().zip(z_e.data()).zip(z_q.data()) {
                *g += beta * 2.0 * (a - b) / n;
            }
        }
        let mut codebook = vec![0.0; self.codebook.entries().len()];
        let (hw, d) = (self.positions(), self.config.code_dim);
        for b in 0..z_e.batch() {
            let ze = z_e.sample(b);
            for pos in 0..hw {
                let k = fwd.assignments[b * hw + pos];
                let e = self.codebook.entry(k);
                for c in 0..d {
                    codebook[k * d + c] += 2.0 * (e[c] - ze[c * hw + pos]) / n;
                }
            }
        }
        let mut encoder = vec![0.0; self.encoder.param_count()];
        self.encoder.backward(&fwd.enc_trace, &d_latent, Some(&mut encoder))?;
        let losses = VqLosses { recon, codebook: sq, commitment: sq, total: recon + sq + beta * sq };
        Ok((losses, VqGrads { encoder, decoder, codebook, d_quantized, d_latent }))
    }

    pub fn loss_and_grads(&mut self, x: &Tensor) -> Result<(VqLosses, VqGrads)> {
        let fwd = self.forward(x, false)?;
        self.backward(x, &fwd, None)
    }

    pub fn freeze(&mut self, x: &Tensor) -> Result<FrozenPoint> {
        let fwd = self.forward(x, false)?;
        Ok(FrozenPoint {
            assignments: fwd.assignments,
            latent: fwd.enc_trace.output().clone(),
            quantized: fwd.quantized,
            codebook: self.codebook.entries().to_vec(),
        })
    }

    /// The composite loss written with its stop-gradient terms held at
    /// `frozen`; it equals the true loss at the base point and is smooth in
    /// every parameter, so finite differences of it check the analytic gradients.
    pub fn surrogate_loss(&self, x: &Tensor, frozen: &FrozenPoint) -> Result<f64> {
        let z_e = self.encoder.predict(x)?;
        let mut dec_in = z_e.clone();
        for ((v, q0), e0) in dec_in.data_mut().iter_mut().zip(frozen.quantized.data()).zip(frozen.latent.data()) {
            *v += q0 - e0;
        }
        let (recon, _) = Loss::Mse.evaluate(&self.decoder.predict(&dec_in)?, x)?;
        let (hw, d) = (self.positions(), self.config.code_dim);
        let n = z_e.len() as f64;
        let (mut cb, mut commit) = (0.0, 0.0);
        for b in 0..z_e.batch() {
            let (ze, ze0) = (z_e.sample(b), frozen.latent.sample(b));
            for pos in 0..hw {
                let k = frozen.assignments[b * hw + pos];
                for c in 0..d {
                    let i = c * hw + pos;
                    let live = self.codebook.entry(k)[c];
                    let fixed = frozen.codebook[k * d + c];
                    cb += (ze0[i] - live).powi(2);
                    commit += (ze[i] - fixed).powi(2);
                }
            }
        }
        Ok(recon + cb / n + self.config.beta * commit / n)
    }

    /// Codes for every image, `positions()` per image in raster order.
    pub fn encode_codes(&mut self, images: &[Image]) -> Result<Vec<Vec<usize>>> {
        let hw = self.positions();
        let mut out = Vec::with_capacity(images.len());
        for chunk in images.chunks(256) {
            let refs: Vec<&Image> = chunk.iter().collect();
            let z = self.encoder.predict(&to_tensor(&refs, self.side))?;
            let a = self.assign(&z, false);
            out.extend(a.chunks(hw).map(|c| c.to_vec()));
        }
        Ok(out)
    }

    pub fn decode_codes(&self, codes: &[Vec<usize>]) -> Result<Tensor> {
        let flat: Vec<usize> = codes.iter().flatten().copied().collect();
        Ok(self.decoder.predict(&self.embed_codes(&flat, codes.len()))?)
    }

    pub fn reconstruct(&mut self, images: &[Image]) -> Result<Vec<Image>> {
        let codes = self.encode_codes(images)?;
        let out = self.decode_codes(&codes)?;
        let (mut recon, _) = into_images(&out, self.side, 0);
        for (r, im) in recon.iter_mut().zip(images) {
            r.label = im.label;
        }
        Ok(recon)
    }

    /// Moves every entry unused since the last usage reset onto a random
    /// latent vector of `latent`. Returns how many entries moved.
    pub fn restart_dead_codes(&mut self, latent: &Tensor, rng: &mut impl rand::Rng) -> usize {
        let hw = self.positions();
        let total = latent.batch() * hw;
        let dead: Vec<usize> = (0..self.codebook.k()).filter(|&i| self.codebook.usage()[i] == 0).collect();
        for &i in &dead {
            let flat = rng.random_range(0..total);
            let v = self.latent_vector(latent, flat / hw, flat % hw);
            self.codebook.entry_mut(i).copy_from_slice(&v);
        }
        dead.len()
    }

    /// Sets codebook entries to encoder outputs at distinct random latent
    /// positions of up to 256 training images.
    fn init_codebook_from_data(&mut self, images: &[Image]) -> Result<()> {
        let mut rng = rng_from_seed(derive_seed(self.config.seed, "vqvae.codebook.init"));
        let take = images.len().min(256);
        let picked: Vec<&Image> = sample(&mut rng, images.len(), take).into_iter().map(|i| &images[i]).collect();
        let z = self.encoder.predict(&to_tensor(&picked, self.side))?;
        let hw = self.positions();
        let total = take * hw;
        let k = self.codebook.k();
        let chosen: Vec<usize> = if total >= k { sample(&mut rng, total, k).into_vec() } else { (0..k).map(|i| i % total).collect() };
        for (entry, &flat) in chosen.iter().enumerate() {
            let v = self.latent_vector(&z, flat / hw, flat % hw);
            self.codebook.entry_mut(entry).copy_from_slice(&v);
        }
        Ok(())
    }
}

/// Optimizer state for the three VQVAE parameter blocks.
#[derive(Debug, Clone)]
pub struct VqOptimizers {
    pub encoder: Optimizer,
    pub decoder: Optimizer,
    pub codebook: Optimizer,
}

impl VqOptimizers {
    pub fn adam(lr: f64) -> Self {
        Self { encoder: Optimizer::adam(lr, 0.9, 0.999), decoder: Optimizer::adam(lr, 0.9, 0.999), codebook: Optimizer::adam(lr, 0.9, 0.999) }
    }

    pub fn apply(&mut self, model: &mut VqVae, grads: &VqGrads) -> Result<()> {
        self.encoder.step(model.encoder.params_mut(), &grads.encoder)?;
        self.decoder.step(model.decoder.params_mut(), &grads.decoder)?;
        self.codebook.step(model.codebook.entries_mut(), &grads.codebook)?;
        Ok(())
    }
}

pub(crate) fn nonfinite(epoch: usize) -> impl Fn(GenError) -> GenError {
    move |e| match e {
        GenError::Nn(riga_nn::NnError::NonFiniteLoss { .. } | riga_nn::NnError::NonFinite { .. }) => GenError::NonFiniteLoss { epoch },
        other => other,
    }
}

/// Per-batch hook used by VQGAN to add an adversarial term; receives the
/// batch and its forward state, returns an extra reconstruction gradient
/// and a vector of values to average into the epoch log.
pub(crate) trait BatchHook {
    fn columns(&self) -> Vec<&'static str>;
    fn on_batch(&mut self, x: &Tensor, fwd: &VqForward) -> Result<(Option<Tensor>, Vec<f64>)>;
    fn on_epoch_end(&mut self, _epoch: usize, _log: &mut TrainingLog) {}
}

pub(crate) fn train_loop(images: &[Image], config: &VqvaeConfig, mut hook: Option<&mut dyn BatchHook>) -> Result<(VqVae, TrainingLog)> {
    let side = common_side(images)?;
    let mut model = VqVae::new(config.clone(), side)?;
    model.init_codebook_from_data(images)?;
    let mut opts = VqOptimizers::adam(config.learning_rate);
    let mut rng = rng_from_seed(derive_seed(config.seed, "vqvae.train"));
    let mut restart_rng = rng_from_seed(derive_seed(config.seed, "vqvae.restart"));
    let mut columns = vec!["recon", "codebook", "commitment", "total"];
    if let Some(h) = hook.as_deref() {
        columns.extend(h.columns());
    }
    let mut log = TrainingLog::new(&columns);
    for epoch in 0..config.epochs {
        model.codebook.reset_usage();
        let mut sums = vec![0.0; columns.len()];
        let mut seen = 0usize;
        let mut last_latent = None;
        for batch in epoch_batches(images.len(), config.batch_size, &mut rng) {
            let refs: Vec<&Image> = batch.iter().map(|&i| &images[i]).collect();
            let x = to_tensor(&refs, side);
            let fwd = model.forward(&x, true).map_err(nonfinite(epoch))?;
            let (extra, hook_vals) = match hook.as_deref_mut() {
                Some(h) => h.on_batch(&x, &fwd)?,
                None => (None, Vec::new()),
            };
            let (l, g) = model.backward(&x, &fwd, extra.as_ref()).map_err(nonfinite(epoch))?;
            opts.apply(&mut model, &g)?;
            let w = batch.len() as f64;
            for (s, v) in sums.iter_mut().zip([l.recon, l.codebook, l.commitment, l.total].into_iter().chain(hook_vals)) {
                *s += v * w;
            }
            seen += batch.len();
            last_latent = Some(fwd.enc_trace.output().clone());
        }
        if sums.iter().any(|v| !v.is_finite()) {
            return Err(GenError::NonFiniteLoss { epoch });
        }
        log.push(sums.iter().map(|s| s / seen as f64).collect());
        if let Some(h) = hook.as_deref_mut() {
            h.on_epoch_end(epoch, &mut log);
        }
        if epoch + 1 == config.epochs {
            let dead = model.codebook.dead_fraction();
            if dead > DEAD_CODE_LIMIT {
                log.warn(format!("dead codebook: {:.1}% of entries unused in the final epoch", dead * 100.0));
            }
        } else if config.restart_dead_codes {
            if let Some(z) = &last_latent {
                model.restart_dead_codes(z, &mut restart_rng);
            }
        }
    }
    Ok((model, log))
}

/// Trains encoder, decoder and codebook on the composite VQ objective
/// with straight-through gradients.
pub fn vqvae_train(images: &[Image], config: &VqvaeConfig) -> Result<(VqVae, TrainingLog)> {
    train_loop(images, config, None)
}

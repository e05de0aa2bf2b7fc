use riga_core::{derive_seed, inverse_transform, rng_from_seed, Dataset, Image, Mapping};
use serde::{Deserialize, Serialize};

use crate::cgan::{cgan_train, Cgan, CganConfig};
use crate::error::{GenError, Result};
use crate::images::into_images;
use crate::log::TrainingLog;
use crate::prior::{prior_train, PixelCnnPrior, PriorConfig};
use crate::transformer::{transformer_train, TransformerConfig, TransformerPrior};
use crate::vqgan::{vqgan_train, VqganConfig};
use crate::vqvae::{vqvae_train, VqVae, VqvaeConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Cgan,
    Vqvae,
    Vqgan,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Cgan => "cgan",
            ModelKind::Vqvae => "vqvae",
            ModelKind::Vqgan => "vqgan",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GenerativeModel {
    Cgan(Cgan),
    Vqvae { vq: VqVae, prior: PixelCnnPrior },
    Vqgan { vq: VqVae, discriminator: riga_nn::Network, prior: TransformerPrior, random_codes: bool },
}

/// A trained model with its per-stage training logs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedGenerative {
    pub kind: ModelKind,
    pub model: GenerativeModel,
    pub logs: Vec<(String, TrainingLog)>,
    pub seed: u64,
}

/// Hyperparameters for every model kind; only the selected one is used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerativeConfig {
    pub kind: ModelKind,
    #[serde(default)]
    pub cgan: CganConfig,
    #[serde(default)]
    pub vqvae: VqvaeConfig,
    #[serde(default)]
    pub prior: PriorConfig,
    #[serde(default)]
    pub vqgan: VqganConfig,
    #[serde(default)]
    pub transformer: TransformerConfig,
    /// VQGAN only: decode uniformly random codes instead of prior samples.
    #[serde(default)]
    pub random_codes: bool,
}

impl GenerativeConfig {
    pub fn new(kind: ModelKind) -> Self {
        Self {
            kind,
            cgan: CganConfig::default(),
            vqvae: VqvaeConfig::default(),
            prior: PriorConfig::default(),
            vqgan: VqganConfig::default(),
            transformer: TransformerConfig::default(),
            random_codes: false,
        }
    }

    pub fn with_epochs(mut self, epochs: usize) -> Self {
        self.cgan.epochs = epochs;
        self.vqvae.epochs = epochs;
        self.prior.epochs = epochs;
        self.vqgan.vq.epochs = epochs;
        self.transformer.epochs = epochs;
        self
    }

    /// Same configuration with every component seeded from `seed`.
    pub fn seeded(&self, seed: u64) -> Self {
        let mut c = self.clone();
        c.cgan.seed = derive_seed(seed, "cgan");
        c.vqvae.seed = derive_seed(seed, "vqvae");
        c.prior.seed = derive_seed(seed, "prior");
        c.vqgan.vq.seed = derive_seed(seed, "vqgan");
        c.transformer.seed = derive_seed(seed, "transformer");
        c
    }
}

/// Trains the configured model on labelled images.
pub fn train_generative(images: &[Image], config: &GenerativeConfig, seed: u64) -> Result<TrainedGenerative> {
    let cfg = config.seeded(seed);
    let labels: Vec<u8> = images.iter().map(|im| im.label).collect();
    let (model, logs) = match cfg.kind {
        ModelKind::Cgan => {
            let (m, log) = cgan_train(images, &cfg.cgan)?;
            (GenerativeModel::Cgan(m), vec![("cgan".to_string(), log)])
        }
        ModelKind::Vqvae => {
            let (mut vq, log) = vqvae_train(images, &cfg.vqvae)?;
            let codes = vq.encode_codes(images)?;
            let (prior, plog) = prior_train(&vq.codebook, &codes, &labels, &cfg.prior)?;
            (GenerativeModel::Vqvae { vq, prior }, vec![("vqvae".to_string(), log), ("prior".to_string(), plog)])
        }
        ModelKind::Vqgan => {
            let (mut vq, discriminator, log) = vqgan_train(images, &cfg.vqgan)?;
            let codes = vq.encode_codes(images)?;
            let (prior, plog) = transformer_train(vq.codebook.k(), &codes, &labels, &cfg.transformer)?;
            (
                GenerativeModel::Vqgan { vq, discriminator, prior, random_codes: cfg.random_codes },
                vec![("vqgan".to_string(), log), ("prior".to_string(), plog)],
            )
        }
    };
    Ok(TrainedGenerative { kind: cfg.kind, model, logs, seed })
}

impl TrainedGenerative {
    pub fn warnings(&self) -> Vec<String> {
        self.logs.iter().flat_map(|(_, l)| l.warnings.iter().cloned()).collect()
    }

    /// `count` synthetic images of class `label`, clamped to `[0, 1]`; a
    /// pure function of the parameters and the arguments.
    pub fn generate(&self, label: u8, count: usize, seed: u64) -> Result<Vec<Image>> {
        if label > 1 {
            return Err(GenError::InvalidArgument(format!("class {label} is not binary")));
        }
        if count == 0 {
            return Ok(Vec::new());
        }
        let mut rng = rng_from_seed(seed);
        match &self.model {
            GenerativeModel::Cgan(m) => m.generate(label, count, seed),
            GenerativeModel::Vqvae { vq, prior } => {
                let mut out = Vec::with_capacity(count);
                for chunk in chunk_sizes(count, 256) {
                    let codes = prior.sample(&vq.codebook, label, chunk, &mut rng)?;
                    out.extend(decode(vq, &codes, label)?);
                }
                Ok(out)
            }
            GenerativeModel::Vqgan { vq, prior, random_codes, .. } => {
                let codes = if *random_codes {
                    use rand::Rng;
                    (0..count).map(|_| (0..vq.positions()).map(|_| rng.random_range(0..vq.codebook.k())).collect()).collect()
                } else {
                    prior.sample(label, count, &mut rng)
                };
                decode(vq, &codes, label)
            }
        }
    }
}

fn chunk_sizes(total: usize, size: usize) -> impl Iterator<Item = usize> {
    (0..total.div_ceil(size)).map(move |i| size.min(total - i * size))
}

fn decode(vq: &VqVae, codes: &[Vec<usize>], label: u8) -> Result<Vec<Image>> {
    let out = vq.decode_codes(codes)?;
    let (images, clamped) = into_images(&out, vq.side, label);
    if clamped > 0 {
        log::info!("{clamped} generated pixel values clamped to [0, 1]");
    }
    Ok(images)
}

/// Synthetic minority rows balancing a training set.
#[derive(Debug, Clone, PartialEq)]
pub struct MinorityRows {
    /// Normalized feature rows read back from the generated images.
    pub normalized: Vec<Vec<f64>>,
    /// The same rows mapped back to original feature units.
    pub denormalized: Vec<Vec<f64>>,
    pub images: Vec<Image>,
}

/// Generates `majority - minority` class-1 images and inverts them to rows.
pub fn generate_minority(model: &TrainedGenerative, train: &Dataset, mapping: &Mapping, seed: u64) -> Result<MinorityRows> {
    let [n0, n1] = train.class_counts();
    let count = n0.saturating_sub(n1);
    let images = model.generate(1, count, seed)?;
    let norm = mapping.normalization();
    let mut normalized = Vec::with_capacity(count);
    let mut denormalized = Vec::with_capacity(count);
    for im in &images {
        let row = inverse_transform(im, mapping)?;
        denormalized.push(norm.denormalize_row(&row));
        normalized.push(row);
    }
    Ok(MinorityRows { normalized, denormalized, images })
}

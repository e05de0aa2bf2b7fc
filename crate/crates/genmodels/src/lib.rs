//! Class-conditional generative models over feature images and the
//! minority-class generation step built on them.

pub mod cgan;
pub mod codebook;
pub mod error;
pub mod images;
pub mod log;
pub mod model;
pub mod prior;
pub mod transformer;
pub mod vqgan;
pub mod vqvae;

pub use cgan::{cgan_train, Cgan, CganConfig, NOISE_DIM};
pub use codebook::{vq_quantize, CodeBook};
pub use error::{GenError, Result};
pub use log::TrainingLog;
pub use model::{generate_minority, train_generative, GenerativeConfig, GenerativeModel, MinorityRows, ModelKind, TrainedGenerative};
pub use prior::{prior_train, PixelCnnPrior, PriorConfig};
pub use transformer::{transformer_train, TransformerConfig, TransformerPrior};
pub use vqgan::{vqgan_train, VqganConfig};
pub use vqvae::{vqvae_train, VqGrads, VqLosses, VqVae, VqvaeConfig, DEFAULT_CODEBOOK_SIZE};

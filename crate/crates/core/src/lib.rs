//! Core of the tabular-to-image augmentation pipeline: datasets, the t-SNE
//! feature embedding, the lossless feature-to-pixel mapping and the classic
//! SMOTE/ADASYN oversamplers.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the precision used by the rest of the workspace.

pub mod baselines;
pub mod data;
pub mod embed;
pub mod error;
pub mod imgmap;
pub mod scalar;
pub mod seed;

pub use data::{
    denormalize, drop_missing, induce_imbalance, kfold_split, load_csv, normalize, read_csv, remove_minority,
    stratified_assign, stratified_folds, synth_imbalanced, DatasetManifest, FoldSplit, ImbalanceOutcome, NormalizationParams,
    TabularDataset,
};
pub use embed::{calibrate_affinities, embed_features, tsne_optimize, Affinities, EmbeddingConfig, FeatureEmbedding};
pub use error::{CoreError, Result};
pub use imgmap::{
    build_mapping, forward_transform, forward_transform_labelled, inverse_transform, inverse_transform_denormalized,
    ImageSample, PixelMapping, DEFAULT_GRID_SIZE,
};
pub use scalar::Scalar;
pub use seed::{derive_seed, rng_from_seed, splitmix64};

pub type Dataset = TabularDataset<f64>;
pub type Dataset32 = TabularDataset<f32>;
pub type Normalization = NormalizationParams<f64>;
pub type Embedding = FeatureEmbedding<f64>;
pub type Mapping = PixelMapping<f64>;
pub type Mapping32 = PixelMapping<f32>;
pub type Image = ImageSample<f64>;
pub type Image32 = ImageSample<f32>;

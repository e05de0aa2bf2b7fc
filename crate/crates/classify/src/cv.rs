//! Per-fold pipeline: normalize, embed, map, augment, classify, score.

use rayon::prelude::*;
use riga_core::baselines::{adasyn, smote, OversampleConfig};
use riga_core::{
    build_mapping, derive_seed, embed_features, forward_transform_labelled, Dataset, EmbeddingConfig, FoldSplit, Image, Mapping,
    NormalizationParams, DEFAULT_GRID_SIZE,
};
use riga_genmodels::{generate_minority, train_generative, GenerativeConfig, ModelKind};
use serde::{Deserialize, Serialize};

use crate::auc::auc;
use crate::cnn::{cnn_train, CnnConfig};
use crate::error::{ClassifyError, Result};
use crate::eval::{EvalResult, FoldReport};
use crate::gbdt::{gbdt_train, GbdtConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassifierSpec {
    Gbdt(GbdtConfig),
    Cnn(CnnConfig),
}

impl ClassifierSpec {
    pub fn label(&self) -> &'static str {
        match self {
            ClassifierSpec::Gbdt(_) => "GBDT",
            ClassifierSpec::Cnn(_) => "CNN",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum AugmenterSpec {
    Smote(OversampleConfig),
    Adasyn(OversampleConfig),
    Generative(GenerativeConfig),
}

impl AugmenterSpec {
    pub fn label(&self) -> &'static str {
        match self {
            AugmenterSpec::Smote(_) => "SMOTE",
            AugmenterSpec::Adasyn(_) => "ADASYN",
            AugmenterSpec::Generative(g) => match g.kind {
                ModelKind::Cgan => "cGAN",
                ModelKind::Vqvae => "VQVAE",
                ModelKind::Vqgan => "VQGAN",
            },
        }
    }

    fn needs_mapping(&self) -> bool {
        matches!(self, AugmenterSpec::Generative(_))
    }
}

/// Feature embedding and grid used to build each fold's mapping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransformConfig {
    pub embedding: EmbeddingConfig,
    pub grid_size: usize,
}

impl Default for TransformConfig {
    fn default() -> Self {
        Self { embedding: EmbeddingConfig::default(), grid_size: DEFAULT_GRID_SIZE }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pipeline {
    pub augmenter: Option<AugmenterSpec>,
    pub classifier: ClassifierSpec,
    #[serde(default)]
    pub transform: TransformConfig,
}

impl Pipeline {
    pub fn new(classifier: ClassifierSpec) -> Self {
        Self { augmenter: None, classifier, transform: TransformConfig::default() }
    }

    pub fn with_augmenter(mut self, augmenter: AugmenterSpec) -> Self {
        self.augmenter = Some(augmenter);
        self
    }

    /// Row label in the results table, e.g. "GBDT w/o Augmentation" or "CNN + SMOTE".
    pub fn label(&self) -> String {
        match &self.augmenter {
            None => format!("{} w/o Augmentation", self.classifier.label()),
            Some(a) => format!("{} + {}", self.classifier.label(), a.label()),
        }
    }

    fn needs_mapping(&self) -> bool {
        matches!(self.classifier, ClassifierSpec::Cnn(_)) || self.augmenter.as_ref().is_some_and(AugmenterSpec::needs_mapping)
    }
}

/// Everything one fold's classifier sees. `train` is normalized with
/// parameters fitted on the training partition and may hold synthetic rows;
/// `test` uses the same parameters, so its values can fall outside [0, 1].
struct FoldData {
    train: Dataset,
    test: Dataset,
    mapping: Option<Mapping>,
    seed: u64,
}

/// Synthetic minority rows in normalized space plus any warnings.
pub struct Augmented {
    pub rows: Vec<Vec<f64>>,
    pub warnings: Vec<String>,
}

pub fn augment(spec: &AugmenterSpec, train: &Dataset, mapping: Option<&Mapping>, seed: u64) -> Result<Augmented> {
    match spec {
        AugmenterSpec::Smote(c) | AugmenterSpec::Adasyn(c) => {
            let cfg = OversampleConfig { seed, ..c.clone() };
            let out = if matches!(spec, AugmenterSpec::Smote(_)) { smote(train, &cfg)? } else { adasyn(train, &cfg)? };
            Ok(Augmented { rows: out.values(), warnings: out.warning.into_iter().collect() })
        }
        AugmenterSpec::Generative(g) => {
            let mapping = mapping.ok_or_else(|| ClassifyError::InvalidArgument("generative augmentation needs a mapping".into()))?;
            let images = to_images(train, mapping, false)?;
            let model = train_generative(&images, g, derive_seed(seed, "train"))?;
            let warnings = model.logs.iter().flat_map(|(name, log)| log.warnings.iter().map(move |w| format!("{name}: {w}"))).collect();
            let rows = generate_minority(&model, train, mapping, derive_seed(seed, "generate"))?;
            Ok(Augmented { rows: rows.normalized, warnings })
        }
    }
}

/// Images of every row. With `clamp`, values are first clamped into [0, 1]
/// (held-out rows normalized with training parameters can leave that range).
pub fn to_images(ds: &Dataset, mapping: &Mapping, clamp: bool) -> Result<Vec<Image>> {
    (0..ds.n_rows())
        .map(|i| {
            let row: Vec<f64> = if clamp {
                ds.row(i).iter().map(|&v| if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) }).collect()
            } else {
                ds.row(i).to_vec()
            };
            let mut im = forward_transform_labelled(&row, ds.labels()[i], mapping)?;
            im.synthetic = ds.is_synthetic(i);
            Ok(im)
        })
        .collect()
}

fn fit_and_score(classifier: &ClassifierSpec, data: &FoldData) -> Result<Vec<f64>> {
    let seed = derive_seed(data.seed, "classifier");
    match classifier {
        ClassifierSpec::Gbdt(c) => {
            let model = gbdt_train(&data.train, &GbdtConfig { seed, ..c.clone() })?;
            Ok(data.test.rows().map(|r| model.predict_proba(r)).collect())
        }
        ClassifierSpec::Cnn(c) => {
            let mapping = data.mapping.as_ref().expect("mapping built for cnn pipelines");
            let train = to_images(&data.train, mapping, false)?;
            let test = to_images(&data.test, mapping, true)?;
            let model = cnn_train(&train, &CnnConfig { seed, ..c.clone() })?;
            model.predict_proba(&test)
        }
    }
}

fn run_fold(ds: &Dataset, folds: &FoldSplit, fold: usize, pipeline: &Pipeline, seed: u64) -> Result<FoldReport> {
    let fold_seed = derive_seed(seed, &format!("fold{fold}"));
    let test_idx = folds.test_indices(fold);
    let train = ds.select_rows(&folds.train_indices(fold));
    let test = ds.select_rows(&test_idx);
    let norm = NormalizationParams::fit(&train);
    let mut train = train.apply_normalization(&norm);
    let test = test.apply_normalization(&norm);
    let mapping = if pipeline.needs_mapping() {
        let cfg = EmbeddingConfig { seed: derive_seed(fold_seed, "embed"), ..pipeline.transform.embedding.clone() };
        let emb = embed_features(&train, &cfg)?;
        Some(build_mapping(&emb, pipeline.transform.grid_size, &norm)?.with_feature_names(ds.feature_names()))
    } else {
        None
    };
    let mut warnings = Vec::new();
    let mut n_synthetic = 0;
    if let Some(aug) = &pipeline.augmenter {
        let out = augment(aug, &train, mapping.as_ref(), derive_seed(fold_seed, "augment"))?;
        n_synthetic = out.rows.len();
        warnings.extend(out.warnings);
        if !out.rows.is_empty() {
            train.append_synthetic(&out.rows, 1)?;
        }
    }
    // Held-out rows come straight from the source rows, never from augmentation.
    if test.synthetic_mask().iter().any(|&s| s) {
        return Err(ClassifyError::InvalidArgument("synthetic rows in a held-out fold".into()));
    }
    let data = FoldData { train, test, mapping, seed: fold_seed };
    let scores = fit_and_score(&pipeline.classifier, &data)?;
    let labels = data.test.labels().to_vec();
    let auc = auc(&scores, &labels)?;
    Ok(FoldReport { fold, auc, scores, labels, test_indices: test_idx, n_synthetic, warnings })
}

/// Runs `pipeline` on every fold in parallel. Every fitted stage sees only
/// that fold's training partition. The first failing fold (by index) aborts
/// the run.
pub fn cross_validate(ds: &Dataset, folds: &FoldSplit, pipeline: &Pipeline, seed: u64) -> Result<EvalResult> {
    if folds.assignments.len() != ds.n_rows() || folds.k < 2 || folds.assignments.iter().any(|&f| f >= folds.k) {
        return Err(ClassifyError::InvalidArgument("fold split does not match the dataset".into()));
    }
    if ds.synthetic_mask().iter().any(|&s| s) {
        return Err(ClassifyError::InvalidArgument("cross-validation input must not contain synthetic rows".into()));
    }
    let reports: Vec<Result<FoldReport>> =
        (0..folds.k).into_par_iter().map(|f| run_fold(ds, folds, f, pipeline, seed).map_err(|e| e.in_fold(f))).collect();
    let reports = reports.into_iter().collect::<Result<Vec<_>>>()?;
    for r in &reports {
        for w in &r.warnings {
            log::warn!("fold {}: {w}", r.fold);
        }
    }
    Ok(EvalResult::from_folds(pipeline.label(), reports))
}

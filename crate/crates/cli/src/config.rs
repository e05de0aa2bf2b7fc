//! Run configuration: a TOML file whose every table and key is optional.
//! Unknown keys are rejected, so a typo fails loudly instead of silently
//! falling back to a default.

use std::path::{Path, PathBuf};

use riga_bayesnet::SearchConfig;
use riga_classify::{AugmenterSpec, ClassifierSpec, CnnConfig, GbdtConfig, Pipeline, TransformConfig};
use riga_core::baselines::OversampleConfig;
use riga_genmodels::{CganConfig, GenerativeConfig, ModelKind, PriorConfig, TransformerConfig, VqganConfig, VqvaeConfig};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Master seed; every other seed is derived from it.
    pub seed: u64,
    pub dataset: DatasetConfig,
    pub transform: TransformConfig,
    pub augment: AugmentConfig,
    pub classify: ClassifyConfig,
    pub bn: BnConfig,
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetConfig {
    /// A CSV path, or `synth:<n_major>,<n_minor>,<d>,<separation>[,<seed>]`.
    pub source: String,
    /// Name used in result tables; defaults to the file stem or "synth".
    pub name: Option<String>,
    pub label_column: String,
    pub missing_token: String,
    /// Features with more missing cells than this are dropped before rows
    /// with any remaining missing cell.
    pub max_missing_per_feature: Option<usize>,
    /// Drop class-1 rows at random until they make up this fraction.
    pub minority_fraction: Option<f64>,
    /// Drop exactly this many class-1 rows at random.
    pub remove_minority: Option<usize>,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self {
            source: "synth:900,100,64,2.5".into(),
            name: None,
            label_column: "label".into(),
            missing_token: "NA".into(),
            max_missing_per_feature: None,
            minority_fraction: None,
            remove_minority: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum AugmenterKind {
    #[default]
    None,
    Smote,
    Adasyn,
    Cgan,
    Vqvae,
    Vqgan,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    #[default]
    Gbdt,
    Cnn,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct AugmentConfig {
    pub method: AugmenterKind,
    /// SMOTE and ADASYN settings; the seed is always derived from the master seed.
    pub oversample: OversampleConfig,
    pub generative: GenerativeOptions,
}

/// Generative-model hyperparameters; only the section matching the chosen
/// method is used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct GenerativeOptions {
    /// Overrides the epoch count of every model stage.
    pub epochs: Option<usize>,
    pub cgan: CganConfig,
    pub vqvae: VqvaeConfig,
    pub prior: PriorConfig,
    pub vqgan: VqganConfig,
    pub transformer: TransformerConfig,
    pub random_codes: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifyConfig {
    pub method: ClassifierKind,
    pub folds: usize,
    pub gbdt: GbdtConfig,
    pub cnn: CnnConfig,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        Self { method: ClassifierKind::Gbdt, folds: 5, gbdt: GbdtConfig::default(), cnn: CnnConfig::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BnConfig {
    /// Run structure learning as part of `pipeline`.
    pub enabled: bool,
    pub bins: usize,
    /// Node whose Markov blanket is reported.
    pub target: String,
    /// Features entering structure learning; all when unset.
    pub features: Option<Vec<String>>,
    /// Dirichlet pseudo-count for the exported CPTs.
    pub alpha: f64,
    pub search: SearchConfig,
}

impl Default for BnConfig {
    fn default() -> Self {
        Self {
            enabled: false,
            bins: 3,
            target: riga_bayesnet::LABEL_NODE.into(),
            features: None,
            alpha: 1.0,
            search: SearchConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Number of rows written as individual PGM images by `transform`.
    pub row_images: usize,
    /// Panels per side (real and synthetic) in sample grids.
    pub grid_panels: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("riga-out"), row_images: 0, grid_panels: 16 }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(CliError::Config(m));
        if i64::try_from(self.seed).is_err() {
            return bad(format!("seed must be at most {}", i64::MAX));
        }
        if self.classify.folds < 2 {
            return bad(format!("classify.folds must be at least 2, got {}", self.classify.folds));
        }
        if self.transform.grid_size == 0 {
            return bad("transform.grid_size must be positive".into());
        }
        if self.dataset.minority_fraction.is_some() && self.dataset.remove_minority.is_some() {
            return bad("dataset.minority_fraction and dataset.remove_minority are mutually exclusive".into());
        }
        if let Some(f) = self.dataset.minority_fraction {
            if !(f > 0.0 && f < 0.5) {
                return bad(format!("dataset.minority_fraction must lie in (0, 0.5), got {f}"));
            }
        }
        if self.augment.oversample.k_neighbors == 0 {
            return bad("augment.oversample.k_neighbors must be positive".into());
        }
        if self.augment.generative.epochs == Some(0) {
            return bad("augment.generative.epochs must be positive".into());
        }
        if self.bn.bins < 2 {
            return bad(format!("bn.bins must be at least 2, got {}", self.bn.bins));
        }
        if !(self.bn.alpha >= 0.0) {
            return bad("bn.alpha must be non-negative".into());
        }
        if self.output.grid_panels == 0 {
            return bad("output.grid_panels must be positive".into());
        }
        if self.classify.method == ClassifierKind::Cnn && self.classify.cnn.blocks.is_empty() && self.classify.cnn.dense.is_empty() {
            return bad("classify.cnn needs at least one conv block or dense layer".into());
        }
        parse_source(&self.dataset.source)?;
        Ok(())
    }

    pub fn dataset_name(&self) -> String {
        if let Some(n) = &self.dataset.name {
            return n.clone();
        }
        match parse_source(&self.dataset.source) {
            Ok(Source::Synth { .. }) => "synth".into(),
            _ => Path::new(&self.dataset.source).file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "dataset".into()),
        }
    }

    pub fn augmenter_spec(&self) -> Option<AugmenterSpec> {
        let g = &self.augment.generative;
        let generative = |kind| {
            let mut c = GenerativeConfig::new(kind);
            c.cgan = g.cgan.clone();
            c.vqvae = g.vqvae.clone();
            c.prior = g.prior.clone();
            c.vqgan = g.vqgan.clone();
            c.transformer = g.transformer.clone();
            c.random_codes = g.random_codes;
            let c = match g.epochs {
                Some(e) => c.with_epochs(e),
                None => c,
            };
            AugmenterSpec::Generative(c)
        };
        match self.augment.method {
            AugmenterKind::None => None,
            AugmenterKind::Smote => Some(AugmenterSpec::Smote(self.augment.oversample.clone())),
            AugmenterKind::Adasyn => Some(AugmenterSpec::Adasyn(self.augment.oversample.clone())),
            AugmenterKind::Cgan => Some(generative(ModelKind::Cgan)),
            AugmenterKind::Vqvae => Some(generative(ModelKind::Vqvae)),
            AugmenterKind::Vqgan => Some(generative(ModelKind::Vqgan)),
        }
    }

    pub fn classifier_spec(&self) -> ClassifierSpec {
        match self.classify.method {
            ClassifierKind::Gbdt => ClassifierSpec::Gbdt(self.classify.gbdt.clone()),
            ClassifierKind::Cnn => ClassifierSpec::Cnn(self.classify.cnn.clone()),
        }
    }

    pub fn pipeline(&self) -> Pipeline {
        Pipeline { augmenter: self.augmenter_spec(), classifier: self.classifier_spec(), transform: self.transform.clone() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Csv(PathBuf),
    Synth { n_major: usize, n_minor: usize, d: usize, separation: f64, seed: Option<u64> },
}

pub fn parse_source(source: &str) -> Result<Source> {
    let Some(spec) = source.strip_prefix("synth:") else {
        if source.trim().is_empty() {
            return Err(CliError::Config("dataset.source is empty".into()));
        }
        return Ok(Source::Csv(PathBuf::from(source)));
    };
    let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
    let err = || CliError::Config(format!("bad synthetic source `{source}`; expected synth:<n_major>,<n_minor>,<d>,<separation>[,<seed>]"));
    if !(4..=5).contains(&parts.len()) {
        return Err(err());
    }
    let n_major = parts[0].parse().map_err(|_| err())?;
    let n_minor = parts[1].parse().map_err(|_| err())?;
    let d = parts[2].parse().map_err(|_| err())?;
    let separation = parts[3].parse().map_err(|_| err())?;
    let seed = parts.get(4).map(|s| s.parse()).transpose().map_err(|_| err())?;
    Ok(Source::Synth { n_major, n_minor, d, separation, seed })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = PipelineConfig::from_toml("").unwrap();
        assert_eq!(cfg, PipelineConfig::default());
        assert_eq!(cfg.classify.folds, 5);
        assert_eq!(cfg.transform.grid_size, 28);
        cfg.validate().unwrap();
    }

    #[test]
    fn partial_tables_keep_other_defaults() {
        let cfg = PipelineConfig::from_toml(
            "seed = 7\n[augment]\nmethod = \"vqvae\"\n[augment.generative]\nepochs = 3\n[augment.generative.vqvae]\nbeta = 0.5\n[classify.gbdt]\nn_trees = 10\n",
        )
        .unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.classify.gbdt.n_trees, 10);
        assert_eq!(cfg.classify.gbdt.max_depth, GbdtConfig::default().max_depth);
        match cfg.augmenter_spec() {
            Some(AugmenterSpec::Generative(g)) => {
                assert_eq!(g.kind, ModelKind::Vqvae);
                assert_eq!(g.vqvae.beta, 0.5);
                assert_eq!(g.vqvae.epochs, 3);
                assert_eq!(g.prior.epochs, 3);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(PipelineConfig::from_toml("sed = 1\n").is_err());
        assert!(PipelineConfig::from_toml("[classify.gbdt]\ntrees = 1\n").is_err());
        assert!(PipelineConfig::from_toml("[augment]\nmethod = \"gan\"\n").is_err());
    }

    #[test]
    fn explain_output_parses_back() {
        let cfg = PipelineConfig::default();
        assert_eq!(PipelineConfig::from_toml(&cfg.to_toml().unwrap()).unwrap(), cfg);
    }

    #[test]
    fn validation() {
        let mut cfg = PipelineConfig::default();
        cfg.classify.folds = 1;
        assert!(cfg.validate().is_err());
        let mut cfg = PipelineConfig::default();
        cfg.dataset.minority_fraction = Some(0.1);
        cfg.dataset.remove_minority = Some(3);
        assert!(cfg.validate().is_err());
        let mut cfg = PipelineConfig::default();
        cfg.dataset.source = "synth:1,2".into();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn sources() {
        assert_eq!(
            parse_source("synth:900,100,64,2.5").unwrap(),
            Source::Synth { n_major: 900, n_minor: 100, d: 64, separation: 2.5, seed: None }
        );
        assert_eq!(parse_source("synth:9, 1, 4, 1, 3").unwrap(), Source::Synth { n_major: 9, n_minor: 1, d: 4, separation: 1.0, seed: Some(3) });
        assert_eq!(parse_source("data/madelon.csv").unwrap(), Source::Csv("data/madelon.csv".into()));
        let mut cfg = PipelineConfig::default();
        assert_eq!(cfg.dataset_name(), "synth");
        cfg.dataset.source = "data/madelon.csv".into();
        assert_eq!(cfg.dataset_name(), "madelon");
    }
}

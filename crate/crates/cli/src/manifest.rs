//! Experiment manifests: everything needed to audit or re-run a command.

use std::collections::BTreeMap;
use std::path::Path;

use riga_classify::EvalResult;
use riga_core::DatasetManifest;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::PipelineConfig;
use crate::error::Result;

pub const MANIFEST_VERSION: u32 = 1;

/// Structure learned on one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BnRun {
    pub n_rows: usize,
    pub bic: f64,
    pub empty_bic: f64,
    pub iterations: usize,
    pub edges: Vec<(String, String)>,
    pub blanket: Vec<String>,
    pub parents: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BnSummary {
    pub target: String,
    pub nodes: Vec<String>,
    /// Constant columns left out of structure learning.
    pub excluded: Vec<String>,
    pub original: BnRun,
    pub augmented: Option<BnRun>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentManifest {
    pub version: u32,
    pub command: String,
    pub config: PipelineConfig,
    pub dataset_name: String,
    pub dataset: DatasetManifest,
    pub seeds: BTreeMap<String, u64>,
    /// Wall-clock seconds per phase. Not part of the content hash.
    pub timings: BTreeMap<String, f64>,
    pub results: Vec<EvalResult>,
    pub bn: Option<BnSummary>,
    /// Paths relative to the output directory.
    pub artifacts: Vec<String>,
    pub warnings: Vec<String>,
    pub content_hash: String,
}

impl ExperimentManifest {
    /// SHA-256 over the canonical JSON form with timings, the output
    /// directory and the stored hash blanked, so identical runs written to
    /// different places hash the same.
    pub fn compute_hash(&self) -> String {
        let mut m = self.clone();
        m.timings.clear();
        m.config.output.dir = Default::default();
        m.content_hash.clear();
        let bytes = serde_json::to_vec(&m).expect("manifest serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    pub fn seal(mut self) -> Self {
        self.content_hash = self.compute_hash();
        self
    }

    pub fn is_intact(&self) -> bool {
        self.content_hash == self.compute_hash()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use riga_classify::FoldReport;

    fn sample() -> ExperimentManifest {
        let ds = riga_core::synth_imbalanced::<f64>(10, 5, 3, 1.0, 1).unwrap();
        let fold = FoldReport {
            fold: 0,
            auc: 0.1 + 0.2,
            scores: vec![0.3, 1.0 / 3.0],
            labels: vec![0, 1],
            test_indices: vec![4, 9],
            n_synthetic: 2,
            warnings: vec![],
        };
        ExperimentManifest {
            version: MANIFEST_VERSION,
            command: "pipeline".into(),
            config: PipelineConfig::default(),
            dataset_name: "synth".into(),
            dataset: DatasetManifest::describe(&ds, None),
            seeds: BTreeMap::from([("master".to_string(), u64::MAX)]),
            timings: BTreeMap::from([("classify".to_string(), 1.25)]),
            results: vec![EvalResult::from_folds("GBDT w/o Augmentation".into(), vec![fold])],
            bn: None,
            artifacts: vec!["results.csv".into()],
            warnings: vec![],
            content_hash: String::new(),
        }
        .seal()
    }

    #[test]
    fn json_round_trip_is_lossless() {
        let m = sample();
        let back: ExperimentManifest = serde_json::from_str(&serde_json::to_string_pretty(&m).unwrap()).unwrap();
        assert_eq!(back, m);
        assert!(back.is_intact());
    }

    #[test]
    fn hash_ignores_timings_and_output_dir_only() {
        let m = sample();
        let mut t = m.clone();
        t.timings.insert("classify".into(), 99.0);
        t.config.output.dir = "elsewhere".into();
        assert_eq!(t.compute_hash(), m.content_hash);
        t.seeds.insert("extra".into(), 1);
        assert_ne!(t.compute_hash(), m.content_hash);
    }
}

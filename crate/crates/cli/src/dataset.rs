use riga_core::{derive_seed, drop_missing, induce_imbalance, load_csv, remove_minority, synth_imbalanced, Dataset};

use crate::config::{parse_source, PipelineConfig, Source};
use crate::error::{CliError, Result};

#[derive(Debug, Clone)]
pub struct LoadedDataset {
    pub name: String,
    pub data: Dataset,
    pub warnings: Vec<String>,
}

/// Loads the configured source and applies missing-value handling and any
/// requested imbalance. Seeds are derived from the master seed under the
/// tags "synth" and "imbalance".
pub fn load_dataset(cfg: &PipelineConfig) -> Result<LoadedDataset> {
    let d = &cfg.dataset;
    let phase = CliError::phase::<riga_core::CoreError>;
    let mut warnings = Vec::new();
    let mut data: Dataset = match parse_source(&d.source)? {
        Source::Synth { n_major, n_minor, d, separation, seed } => {
            synth_imbalanced(n_major, n_minor, d, separation, seed.unwrap_or_else(|| derive_seed(cfg.seed, "synth"))).map_err(phase("load"))?
        }
        Source::Csv(path) => load_csv(&path, &d.label_column, &d.missing_token).map_err(phase("load"))?,
    };
    if data.has_missing() {
        let before = (data.n_rows(), data.n_features());
        data = drop_missing(&data, d.max_missing_per_feature.unwrap_or(data.n_rows())).map_err(phase("missing values"))?;
        warnings.push(format!(
            "dropped {} features and {} rows with missing values",
            before.1 - data.n_features(),
            before.0 - data.n_rows()
        ));
    }
    let imbalance_seed = derive_seed(cfg.seed, "imbalance");
    let outcome = match (d.minority_fraction, d.remove_minority) {
        (Some(f), _) => Some(induce_imbalance(&data, f, imbalance_seed).map_err(phase("imbalance"))?),
        (None, Some(n)) => Some(remove_minority(&data, n, imbalance_seed).map_err(phase("imbalance"))?),
        (None, None) => None,
    };
    if let Some(o) = outcome {
        warnings.extend(o.warning);
        data = o.dataset;
    }
    Ok(LoadedDataset { name: cfg.dataset_name(), data, warnings })
}

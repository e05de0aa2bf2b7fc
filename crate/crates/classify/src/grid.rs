//! Exhaustive CNN hyperparameter search by inner cross-validation.

use rayon::prelude::*;
use riga_core::{Dataset, FoldSplit};
use serde::{Deserialize, Serialize};

use crate::cnn::{CnnConfig, ConvBlock};
use crate::cv::{cross_validate, ClassifierSpec, Pipeline, TransformConfig};
use crate::error::{ClassifyError, Result};

/// Batch size {32, 64} × conv blocks {1, 2} × dense width {64, 128}, in that
/// nesting order; the other fields come from `base`.
pub fn default_grid(base: &CnnConfig) -> Vec<CnnConfig> {
    let mut grid = Vec::with_capacity(8);
    for batch_size in [32, 64] {
        for n_blocks in [1, 2] {
            for width in [64, 128] {
                let blocks = [ConvBlock { channels: 16, kernel: 3 }, ConvBlock { channels: 32, kernel: 3 }][..n_blocks].to_vec();
                grid.push(CnnConfig { blocks, dense: vec![width], batch_size, ..base.clone() });
            }
        }
    }
    grid
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSearchResult {
    pub best_index: usize,
    pub best: CnnConfig,
    /// Mean inner-CV AUC per grid point, in lattice order.
    pub scores: Vec<f64>,
}

/// Scores every config by cross-validated AUC over `folds` of `ds` (the
/// caller's training data) and returns the argmax; ties go to the earliest
/// config.
pub fn grid_search_cnn(ds: &Dataset, folds: &FoldSplit, grid: &[CnnConfig], transform: &TransformConfig, seed: u64) -> Result<GridSearchResult> {
    if grid.is_empty() {
        return Err(ClassifyError::InvalidArgument("empty grid".into()));
    }
    let scores = grid
        .par_iter()
        .map(|cfg| {
            let pipeline = Pipeline { augmenter: None, classifier: ClassifierSpec::Cnn(cfg.clone()), transform: transform.clone() };
            cross_validate(ds, folds, &pipeline, seed).map(|r| r.mean)
        })
        .collect::<Vec<Result<f64>>>()
        .into_iter()
        .collect::<Result<Vec<f64>>>()?;
    let mut best_index = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best_index] {
            best_index = i;
        }
    }
    Ok(GridSearchResult { best_index, best: grid[best_index].clone(), scores })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_order() {
        let g = default_grid(&CnnConfig::default());
        assert_eq!(g.len(), 8);
        assert_eq!((g[0].batch_size, g[0].blocks.len(), g[0].dense[0]), (32, 1, 64));
        assert_eq!((g[7].batch_size, g[7].blocks.len(), g[7].dense[0]), (64, 2, 128));
    }
}

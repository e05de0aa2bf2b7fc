//! Classifiers (gradient-boosted trees on rows, a CNN on mapped images), the
//! AUC metric, and the cross-validation and grid-search harnesses.

pub mod auc;
pub mod cnn;
pub mod cv;
pub mod error;
pub mod eval;
pub mod gbdt;
pub mod grid;

pub use auc::{auc, roc_curve};
pub use cnn::{cnn_train, Cnn, CnnConfig, ConvBlock};
pub use cv::{augment, cross_validate, to_images, Augmented, AugmenterSpec, ClassifierSpec, Pipeline, TransformConfig};
pub use error::{ClassifyError, Result};
pub use eval::{append_results_csv, mean_std, roc_svg, EvalResult, FoldReport};
pub use gbdt::{gbdt_fit, gbdt_train, split_gain, Gbdt, GbdtConfig, Node, Tree};
pub use grid::{default_grid, grid_search_cnn, GridSearchResult};

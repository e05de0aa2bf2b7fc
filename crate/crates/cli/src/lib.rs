//! Command-line front end for the RIGA pipeline: configuration, the
//! transform / augment / classify / bnlearn / pipeline commands, experiment
//! manifests and reports.
//!
//! Every seed used by a run is derived from the master seed with
//! [`riga_core::derive_seed`] under a fixed tag ("synth", "imbalance",
//! "folds", "cv", "embed", "augment", "bn", "bn_augmented"); the tags and
//! values are listed in each manifest.

pub mod commands;
pub mod config;
pub mod dataset;
pub mod error;
pub mod figures;
pub mod manifest;
pub mod outdir;
pub mod report;
pub mod structure;

pub use commands::{run_command, Command};
pub use config::{AugmenterKind, ClassifierKind, PipelineConfig};
pub use error::{CliError, Result};
pub use manifest::{BnRun, BnSummary, ExperimentManifest};
pub use report::{build_report, Report};

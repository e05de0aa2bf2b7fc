//! Discrete Bayesian-network structure learning: equal-frequency
//! discretization, BIC scoring, tabu search, CPT fitting, ancestral
//! sampling and Markov-blanket extraction.
//!
//! Scores follow the log-likelihood-minus-penalty convention: higher is
//! better.

pub mod cpt;
pub mod dag;
pub mod data;
pub mod error;
pub mod export;
pub mod graph;
pub mod score;
pub mod search;

pub use cpt::{fit_cpts, sample_from_bn, Cpt, NodeCpt};
pub use dag::{Dag, Move};
pub use data::{discretize, quantile_edges, ColumnBinning, DiscreteData, Discretization, LABEL_NODE};
pub use error::{BnError, Result};
pub use export::{blanket_dot, blanket_report, to_dot, AdjacencyList};
pub use graph::{cpdag, markov_blanket, markov_equivalent, skeleton, v_structures, Cpdag};
pub use score::{bic_score, family_score, free_params, ScoreCache};
pub use search::{tabu_search, SearchConfig, SearchResult};

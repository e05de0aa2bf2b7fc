//! Categorical data and equal-frequency discretization.

use riga_core::Dataset;
use serde::{Deserialize, Serialize};

use crate::error::{BnError, Result};

/// `n_rows × n_vars` category indices, stored by column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteData {
    names: Vec<String>,
    cards: Vec<usize>,
    columns: Vec<Vec<usize>>,
}

impl DiscreteData {
    pub fn new(names: Vec<String>, cards: Vec<usize>, columns: Vec<Vec<usize>>) -> Result<Self> {
        if names.len() != cards.len() || names.len() != columns.len() {
            return Err(BnError::InvalidArgument("names, cardinalities and columns differ in count".into()));
        }
        let n = columns.first().map_or(0, Vec::len);
        for (j, col) in columns.iter().enumerate() {
            if col.len() != n {
                return Err(BnError::InvalidArgument("columns differ in length".into()));
            }
            if cards[j] < 2 {
                return Err(BnError::InvalidArgument(format!("column {} has cardinality {} < 2", names[j], cards[j])));
            }
            if let Some(&value) = col.iter().find(|&&v| v >= cards[j]) {
                return Err(BnError::ValueOutOfRange { column: j, value, card: cards[j] });
            }
        }
        Ok(Self { names, cards, columns })
    }

    /// Builds from row-major records.
    pub fn from_rows(names: Vec<String>, cards: Vec<usize>, rows: &[Vec<usize>]) -> Result<Self> {
        let v = names.len();
        if rows.iter().any(|r| r.len() != v) {
            return Err(BnError::InvalidArgument("row width differs from the variable count".into()));
        }
        let columns = (0..v).map(|j| rows.iter().map(|r| r[j]).collect()).collect();
        Self::new(names, cards, columns)
    }

    pub fn n_rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn n_vars(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn cards(&self) -> &[usize] {
        &self.cards
    }

    pub fn card(&self, j: usize) -> usize {
        self.cards[j]
    }

    pub fn column(&self, j: usize) -> &[usize] {
        &self.columns[j]
    }

    pub fn value(&self, row: usize, j: usize) -> usize {
        self.columns[j][row]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

/// How one source column was turned into categories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ColumnBinning {
    /// Category `k` holds values `x` with `edges[k-1] <= x < edges[k]`.
    Quantile { edges: Vec<f64> },
    /// Each distinct value is its own category, in ascending order.
    PassThrough { values: Vec<f64> },
}

impl ColumnBinning {
    pub fn category(&self, x: f64) -> usize {
        match self {
            ColumnBinning::Quantile { edges } => edges.iter().take_while(|&&e| e <= x).count(),
            ColumnBinning::PassThrough { values } => values.iter().position(|&v| v == x).unwrap_or_else(|| values.iter().take_while(|&&v| v < x).count().min(values.len() - 1)),
        }
    }

    pub fn cardinality(&self) -> usize {
        match self {
            ColumnBinning::Quantile { edges } => edges.len() + 1,
            ColumnBinning::PassThrough { values } => values.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Discretization {
    pub data: DiscreteData,
    /// Binning of each retained column, in `data` order.
    pub binnings: Vec<ColumnBinning>,
    /// Columns with a single distinct value, left out of `data`.
    pub excluded: Vec<String>,
}

pub const LABEL_NODE: &str = "label";

/// Equal-frequency cut points: the values at ranks `⌊k·n/bins⌋`, with
/// duplicates and cuts at the minimum dropped.
pub fn quantile_edges(sorted: &[f64], bins: usize) -> Vec<f64> {
    let n = sorted.len();
    let mut edges: Vec<f64> = (1..bins).map(|k| sorted[k * n / bins]).filter(|&e| e > sorted[0]).collect();
    edges.dedup();
    if edges.is_empty() {
        if let Some(&next) = sorted.iter().find(|&&v| v > sorted[0]) {
            edges.push(next);
        }
    }
    edges
}

fn bin_column(values: &[f64], bins: usize) -> Option<ColumnBinning> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut distinct = sorted.clone();
    distinct.dedup();
    if distinct.len() < 2 {
        return None;
    }
    if distinct.len() <= bins && distinct.iter().all(|v| v.fract() == 0.0) {
        return Some(ColumnBinning::PassThrough { values: distinct });
    }
    Some(ColumnBinning::Quantile { edges: quantile_edges(&sorted, bins) })
}

/// Bins every feature of `ds` and appends the class label as a final node.
pub fn discretize(ds: &Dataset, bins: usize) -> Result<Discretization> {
    if bins < 2 {
        return Err(BnError::InvalidArgument("bins must be at least 2".into()));
    }
    if ds.has_missing() {
        return Err(BnError::InvalidArgument("discretization needs complete data".into()));
    }
    let mut names = Vec::new();
    let mut cards = Vec::new();
    let mut columns = Vec::new();
    let mut binnings = Vec::new();
    let mut excluded = Vec::new();
    let mut push = |name: String, values: Vec<f64>| match bin_column(&values, bins) {
        Some(b) => {
            columns.push(values.iter().map(|&x| b.category(x)).collect());
            cards.push(b.cardinality());
            names.push(name);
            binnings.push(b);
        }
        None => excluded.push(name),
    };
    for (j, name) in ds.feature_names().iter().enumerate() {
        push(name.clone(), ds.column(j));
    }
    push(LABEL_NODE.to_string(), ds.labels().iter().map(|&y| y as f64).collect());
    Ok(Discretization { data: DiscreteData::new(names, cards, columns)?, binnings, excluded })
}

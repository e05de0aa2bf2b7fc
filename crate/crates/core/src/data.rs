//! Tabular datasets: ingestion, missing-value handling, min-max scaling,
//! imbalance induction, stratified folds and a synthetic generator.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use rand::seq::SliceRandom;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CoreError, Result};
use crate::scalar::Scalar;
use crate::seed::rng_from_seed;

/// Binary-labelled numeric table. Rows are stored row-major; label 1 is
/// always the minority class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct TabularDataset<T> {
    values: Vec<T>,
    n_features: usize,
    labels: Vec<u8>,
    feature_names: Vec<String>,
    missing: Vec<bool>,
    synthetic: Vec<bool>,
    /// Original label spellings for classes 0 and 1, when loaded from text.
    label_names: Option<[String; 2]>,
}

impl<T: Scalar> TabularDataset<T> {
    pub fn new(rows: Vec<Vec<T>>, labels: Vec<u8>, feature_names: Vec<String>) -> Result<Self> {
        let d = feature_names.len();
        if rows.is_empty() || d == 0 {
            return Err(CoreError::InvalidArgument("dataset needs at least one row and one feature".into()));
        }
        if rows.len() != labels.len() {
            return Err(CoreError::DimensionMismatch { expected: rows.len(), actual: labels.len() });
        }
        if let Some(&bad) = labels.iter().find(|&&l| l > 1) {
            return Err(CoreError::InvalidArgument(format!("label {bad} is not binary")));
        }
        let mut values = Vec::with_capacity(rows.len() * d);
        for row in &rows {
            if row.len() != d {
                return Err(CoreError::DimensionMismatch { expected: d, actual: row.len() });
            }
            values.extend_from_slice(row);
        }
        let n = rows.len();
        Ok(Self {
            values,
            n_features: d,
            labels,
            feature_names,
            missing: vec![false; n * d],
            synthetic: vec![false; n],
            label_names: None,
        })
    }

    /// Builds a dataset with an explicit missing mask. Missing cells hold NaN.
    pub fn with_missing(
        rows: Vec<Vec<T>>,
        labels: Vec<u8>,
        feature_names: Vec<String>,
        missing: Vec<Vec<bool>>,
    ) -> Result<Self> {
        let mut ds = Self::new(rows, labels, feature_names)?;
        if missing.len() != ds.n_rows() {
            return Err(CoreError::DimensionMismatch { expected: ds.n_rows(), actual: missing.len() });
        }
        let d = ds.n_features;
        for (i, m) in missing.iter().enumerate() {
            if m.len() != d {
                return Err(CoreError::DimensionMismatch { expected: d, actual: m.len() });
            }
            for (j, &flag) in m.iter().enumerate() {
                ds.missing[i * d + j] = flag;
                if flag {
                    ds.values[i * d + j] = T::nan();
                }
            }
        }
        Ok(ds)
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.values[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.values.chunks_exact(self.n_features)
    }

    pub fn value(&self, i: usize, j: usize) -> T {
        self.values[i * self.n_features + j]
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn is_missing(&self, i: usize, j: usize) -> bool {
        self.missing[i * self.n_features + j]
    }

    pub fn has_missing(&self) -> bool {
        self.missing.iter().any(|&m| m)
    }

    pub fn is_synthetic(&self, i: usize) -> bool {
        self.synthetic[i]
    }

    pub fn synthetic_mask(&self) -> &[bool] {
        &self.synthetic
    }

    pub fn label_names(&self) -> Option<&[String; 2]> {
        self.label_names.as_ref()
    }

    pub fn set_label_names(&mut self, names: [String; 2]) {
        self.label_names = Some(names);
    }

    /// Counts of class 0 and class 1.
    pub fn class_counts(&self) -> [usize; 2] {
        let ones = self.labels.iter().filter(|&&l| l == 1).count();
        [self.labels.len() - ones, ones]
    }

    /// Column `j` as a freshly allocated vector.
    pub fn column(&self, j: usize) -> Vec<T> {
        self.rows().map(|r| r[j]).collect()
    }

    /// Transposed copy (features × rows), the layout the feature embedding works on.
    pub fn transposed(&self) -> Vec<Vec<T>> {
        (0..self.n_features).map(|j| self.column(j)).collect()
    }

    /// Subset of rows, in the order given.
    pub fn select_rows(&self, indices: &[usize]) -> Self {
        let d = self.n_features;
        let mut values = Vec::with_capacity(indices.len() * d);
        let mut missing = Vec::with_capacity(indices.len() * d);
        for &i in indices {
            values.extend_from_slice(self.row(i));
            missing.extend_from_slice(&self.missing[i * d..(i + 1) * d]);
        }
        Self {
            values,
            n_features: d,
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            feature_names: self.feature_names.clone(),
            missing,
            synthetic: indices.iter().map(|&i| self.synthetic[i]).collect(),
            label_names: self.label_names.clone(),
        }
    }

    /// Subset of feature columns, in the order given.
    pub fn select_features(&self, features: &[usize]) -> Self {
        let n = self.n_rows();
        let mut values = Vec::with_capacity(n * features.len());
        let mut missing = Vec::with_capacity(n * features.len());
        for i in 0..n {
            for &j in features {
                values.push(self.value(i, j));
                missing.push(self.is_missing(i, j));
            }
        }
        Self {
            values,
            n_features: features.len(),
            labels: self.labels.clone(),
            feature_names: features.iter().map(|&j| self.feature_names[j].clone()).collect(),
            missing,
            synthetic: self.synthetic.clone(),
            label_names: self.label_names.clone(),
        }
    }

    /// Appends rows tagged as synthetic.
    pub fn append_synthetic(&mut self, rows: &[Vec<T>], label: u8) -> Result<()> {
        for row in rows {
            if row.len() != self.n_features {
                return Err(CoreError::DimensionMismatch { expected: self.n_features, actual: row.len() });
            }
        }
        for row in rows {
            self.values.extend_from_slice(row);
            self.missing.extend(std::iter::repeat(false).take(self.n_features));
            self.labels.push(label);
            self.synthetic.push(true);
        }
        Ok(())
    }

    /// Same rows with every synthetic row removed.
    pub fn without_synthetic(&self) -> Self {
        let keep: Vec<usize> = (0..self.n_rows()).filter(|&i| !self.synthetic[i]).collect();
        self.select_rows(&keep)
    }

    /// Converts the scalar type.
    pub fn cast<U: Scalar>(&self) -> TabularDataset<U> {
        TabularDataset {
            values: self.values.iter().map(|v| U::lit(v.to_f64_lossy())).collect(),
            n_features: self.n_features,
            labels: self.labels.clone(),
            feature_names: self.feature_names.clone(),
            missing: self.missing.clone(),
            synthetic: self.synthetic.clone(),
            label_names: self.label_names.clone(),
        }
    }

    /// SHA-256 over names, values (as f64 bits), labels and synthetic flags.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        for name in &self.feature_names {
            h.update(name.as_bytes());
            h.update([0u8]);
        }
        for v in &self.values {
            h.update(v.to_f64_lossy().to_bits().to_le_bytes());
        }
        h.update(&self.labels);
        h.update(self.synthetic.iter().map(|&s| s as u8).collect::<Vec<_>>());
        hex::encode(h.finalize())
    }
}

/// Reads a dataset from a CSV file with a header row.
pub fn load_csv<T: Scalar>(path: impl AsRef<Path>, label_column: &str, missing_token: &str) -> Result<TabularDataset<T>> {
    let file = std::fs::File::open(path)?;
    read_csv(file, label_column, missing_token)
}

/// Reads a dataset from any CSV source. Empty cells and cells equal to
/// `missing_token` are marked missing. The less frequent label becomes class 1;
/// on a tie the lexicographically larger spelling does.
pub fn read_csv<T: Scalar, R: Read>(reader: R, label_column: &str, missing_token: &str) -> Result<TabularDataset<T>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|e| CoreError::Parse { line: 1, message: e.to_string() })?
        .clone();
    let label_idx = header
        .iter()
        .position(|h| h.trim() == label_column)
        .ok_or_else(|| CoreError::MissingLabelColumn(label_column.to_string()))?;
    let feature_names: Vec<String> = header
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != label_idx)
        .map(|(_, h)| h.trim().to_string())
        .collect();

    let mut rows = Vec::new();
    let mut missing = Vec::new();
    let mut raw_labels = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            CoreError::Parse { line, message: e.to_string() }
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let mut row = Vec::with_capacity(feature_names.len());
        let mut miss = Vec::with_capacity(feature_names.len());
        for (i, cell) in record.iter().enumerate() {
            if i == label_idx {
                continue;
            }
            let cell = cell.trim();
            if cell.is_empty() || cell == missing_token {
                row.push(T::nan());
                miss.push(true);
            } else {
                let v: f64 = cell.parse().map_err(|_| CoreError::Parse {
                    line,
                    message: format!("column `{}`: cannot parse `{cell}` as a number", header.get(i).unwrap_or("?")),
                })?;
                row.push(T::lit(v));
                miss.push(false);
            }
        }
        let label = record.get(label_idx).unwrap_or("").trim().to_string();
        if label.is_empty() || label == missing_token {
            return Err(CoreError::Parse { line, message: "missing label".into() });
        }
        raw_labels.push(label);
        rows.push(row);
        missing.push(miss);
    }
    if rows.is_empty() {
        return Err(CoreError::Parse { line: 1, message: "no data rows".into() });
    }

    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for l in &raw_labels {
        *counts.entry(l.as_str()).or_default() += 1;
    }
    if counts.len() != 2 {
        return Err(CoreError::NonBinaryLabel(counts.len()));
    }
    let entries: Vec<(&str, usize)> = counts.into_iter().collect();
    // BTreeMap order is lexicographic, so on a tie the second entry wins class 1.
    let (minority, majority) = if entries[0].1 < entries[1].1 {
        (entries[0].0.to_string(), entries[1].0.to_string())
    } else {
        (entries[1].0.to_string(), entries[0].0.to_string())
    };
    let labels: Vec<u8> = raw_labels.iter().map(|l| u8::from(*l == minority)).collect();
    let mut ds = TabularDataset::with_missing(rows, labels, feature_names, missing)?;
    ds.set_label_names([majority, minority]);
    Ok(ds)
}

/// Removes features with more than `max_missing_per_feature` missing cells,
/// then every row that still has a missing cell.
pub fn drop_missing<T: Scalar>(ds: &TabularDataset<T>, max_missing_per_feature: usize) -> Result<TabularDataset<T>> {
    let keep_features: Vec<usize> = (0..ds.n_features())
        .filter(|&j| (0..ds.n_rows()).filter(|&i| ds.is_missing(i, j)).count() <= max_missing_per_feature)
        .collect();
    if keep_features.is_empty() {
        return Err(CoreError::NoCompleteRows);
    }
    let reduced = ds.select_features(&keep_features);
    let keep_rows: Vec<usize> = (0..reduced.n_rows())
        .filter(|&i| (0..reduced.n_features()).all(|j| !reduced.is_missing(i, j)))
        .collect();
    if keep_rows.is_empty() {
        return Err(CoreError::NoCompleteRows);
    }
    Ok(reduced.select_rows(&keep_rows))
}

/// Per-feature min-max parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct NormalizationParams<T> {
    pub min: Vec<T>,
    pub max: Vec<T>,
}

impl<T: Scalar> NormalizationParams<T> {
    pub fn fit(ds: &TabularDataset<T>) -> Self {
        let d = ds.n_features();
        let mut min = vec![T::infinity(); d];
        let mut max = vec![T::neg_infinity(); d];
        for row in ds.rows() {
            for (j, &v) in row.iter().enumerate() {
                if v.is_nan() {
                    continue;
                }
                min[j] = min[j].min(v);
                max[j] = max[j].max(v);
            }
        }
        // All-missing columns degenerate to a constant zero feature.
        for j in 0..d {
            if min[j] > max[j] {
                min[j] = T::zero();
                max[j] = T::zero();
            }
        }
        Self { min, max }
    }

    pub fn n_features(&self) -> usize {
        self.min.len()
    }

    pub fn is_constant(&self, j: usize) -> bool {
        self.min[j] == self.max[j]
    }

    pub fn constant_features(&self) -> Vec<usize> {
        (0..self.n_features()).filter(|&j| self.is_constant(j)).collect()
    }

    #[inline]
    pub fn normalize_value(&self, j: usize, x: T) -> T {
        if self.is_constant(j) {
            T::zero()
        } else {
            (x - self.min[j]) / (self.max[j] - self.min[j])
        }
    }

    #[inline]
    pub fn denormalize_value(&self, j: usize, u: T) -> T {
        if self.is_constant(j) {
            self.min[j]
        } else {
            self.min[j] + u * (self.max[j] - self.min[j])
        }
    }

    /// Scales a row; values outside the fitted range map outside [0, 1].
    pub fn normalize_row(&self, row: &[T]) -> Vec<T> {
        row.iter().enumerate().map(|(j, &x)| self.normalize_value(j, x)).collect()
    }

    pub fn denormalize_row(&self, row: &[T]) -> Vec<T> {
        row.iter().enumerate().map(|(j, &u)| self.denormalize_value(j, u)).collect()
    }

    pub fn cast<U: Scalar>(&self) -> NormalizationParams<U> {
        NormalizationParams {
            min: self.min.iter().map(|v| U::lit(v.to_f64_lossy())).collect(),
            max: self.max.iter().map(|v| U::lit(v.to_f64_lossy())).collect(),
        }
    }
}

impl<T: Scalar> TabularDataset<T> {
    /// Applies fitted parameters to every row (used for held-out folds).
    pub fn apply_normalization(&self, params: &NormalizationParams<T>) -> Self {
        let mut out = self.clone();
        let d = self.n_features;
        for (i, chunk) in out.values.chunks_exact_mut(d).enumerate() {
            for (j, v) in chunk.iter_mut().enumerate() {
                if !self.missing[i * d + j] {
                    *v = params.normalize_value(j, *v);
                }
            }
        }
        out
    }

    pub fn apply_denormalization(&self, params: &NormalizationParams<T>) -> Self {
        let mut out = self.clone();
        for chunk in out.values.chunks_exact_mut(self.n_features) {
            for (j, v) in chunk.iter_mut().enumerate() {
                *v = params.denormalize_value(j, *v);
            }
        }
        out
    }
}

/// Min-max scales every feature to [0, 1]; constant features map to 0.
pub fn normalize<T: Scalar>(ds: &TabularDataset<T>) -> (TabularDataset<T>, NormalizationParams<T>) {
    let params = NormalizationParams::fit(ds);
    (ds.apply_normalization(&params), params)
}

pub fn denormalize<T: Scalar>(ds: &TabularDataset<T>, params: &NormalizationParams<T>) -> TabularDataset<T> {
    ds.apply_denormalization(params)
}

#[derive(Debug, Clone)]
pub struct ImbalanceOutcome<T> {
    pub dataset: TabularDataset<T>,
    pub removed: usize,
    /// Set when the requested fraction was not reachable by removal.
    pub warning: Option<String>,
}

/// Minority count `m` minimizing `|m / (n0 + m) - fraction|` over `0..=n1`.
pub fn target_minority_count(n0: usize, n1: usize, fraction: f64) -> usize {
    let ideal = fraction * n0 as f64 / (1.0 - fraction);
    let lo = (ideal.floor().max(0.0) as usize).min(n1);
    let hi = (ideal.ceil().max(0.0) as usize).min(n1);
    let err = |m: usize| ((m as f64) / ((n0 + m) as f64) - fraction).abs();
    if err(hi) < err(lo) {
        hi
    } else {
        lo
    }
}

/// Randomly drops class-1 rows until class 1 makes up `minority_fraction`
/// of the data. Class-0 rows are never touched and row order is preserved.
pub fn induce_imbalance<T: Scalar>(ds: &TabularDataset<T>, minority_fraction: f64, seed: u64) -> Result<ImbalanceOutcome<T>> {
    if !(minority_fraction > 0.0 && minority_fraction < 0.5) {
        return Err(CoreError::InvalidArgument(format!(
            "minority fraction must lie in (0, 0.5), got {minority_fraction}"
        )));
    }
    let [n0, n1] = ds.class_counts();
    let current = n1 as f64 / (n0 + n1) as f64;
    if current <= minority_fraction {
        return Ok(ImbalanceOutcome {
            dataset: ds.clone(),
            removed: 0,
            warning: (current < minority_fraction)
                .then(|| format!("minority fraction already {current:.4}, below target {minority_fraction:.4}")),
        });
    }
    let target = target_minority_count(n0, n1, minority_fraction);
    remove_minority(ds, n1 - target, seed)
}

/// Drops exactly `count` class-1 rows chosen uniformly at random.
pub fn remove_minority<T: Scalar>(ds: &TabularDataset<T>, count: usize, seed: u64) -> Result<ImbalanceOutcome<T>> {
    let mut minority: Vec<usize> = (0..ds.n_rows()).filter(|&i| ds.labels()[i] == 1).collect();
    if count > minority.len() {
        return Err(CoreError::InvalidArgument(format!(
            "cannot remove {count} of {} class-1 rows",
            minority.len()
        )));
    }
    let mut rng = rng_from_seed(seed);
    minority.shuffle(&mut rng);
    let mut drop = vec![false; ds.n_rows()];
    for &i in &minority[..count] {
        drop[i] = true;
    }
    let keep: Vec<usize> = (0..ds.n_rows()).filter(|&i| !drop[i]).collect();
    Ok(ImbalanceOutcome { dataset: ds.select_rows(&keep), removed: count, warning: None })
}

/// Assignment of rows to `k` folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldSplit {
    pub k: usize,
    pub assignments: Vec<usize>,
}

impl FoldSplit {
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len()).filter(|&i| self.assignments[i] == fold).collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len()).filter(|&i| self.assignments[i] != fold).collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.assignments {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Stratified k-fold assignment: each class is shuffled and dealt round-robin,
/// the second class continuing where the first stopped so fold sizes differ
/// by at most one.
pub fn kfold_split<T: Scalar>(ds: &TabularDataset<T>, k: usize, seed: u64) -> Result<FoldSplit> {
    stratified_folds(ds.labels(), k, seed)
}

/// Label-only variant of [`kfold_split`]: every class needs at least `k`
/// members so each held-out fold contains both classes.
pub fn stratified_folds(labels: &[u8], k: usize, seed: u64) -> Result<FoldSplit> {
    for class in 0..=1u8 {
        let count = labels.iter().filter(|&&l| l == class).count();
        if count < k {
            return Err(CoreError::ClassTooSmall { class, count, k });
        }
    }
    stratified_assign(labels, k, seed)
}

/// Stratified round-robin assignment without the per-class minimum. Only
/// requires every class to appear at least twice, which keeps both classes
/// in every training partition; held-out folds may miss the minority.
pub fn stratified_assign(labels: &[u8], k: usize, seed: u64) -> Result<FoldSplit> {
    if k < 2 || k > labels.len() {
        return Err(CoreError::InvalidArgument(format!("need 2 <= k <= {}, got {k}", labels.len())));
    }
    let mut rng = rng_from_seed(seed);
    let mut assignments = vec![0; labels.len()];
    let mut next = 0;
    for class in 0..=1u8 {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if idx.len() < 2 {
            return Err(CoreError::ClassTooSmall { class, count: idx.len(), k: 2 });
        }
        idx.shuffle(&mut rng);
        for i in idx {
            assignments[i] = next;
            next = (next + 1) % k;
        }
    }
    Ok(FoldSplit { k, assignments })
}

/// Two unit-variance Gaussian clusters whose means are `separation` apart
/// (class 0 at the origin, class 1 along the all-ones diagonal). Rows are
/// shuffled.
pub fn synth_imbalanced<T: Scalar>(n_major: usize, n_minor: usize, d: usize, separation: f64, seed: u64) -> Result<TabularDataset<T>> {
    if n_major == 0 || n_minor == 0 || d == 0 {
        return Err(CoreError::InvalidArgument("synthetic dataset counts must be at least 1".into()));
    }
    let mut rng = rng_from_seed(seed);
    let shift = separation / (d as f64).sqrt();
    let mut rows = Vec::with_capacity(n_major + n_minor);
    let mut labels = Vec::with_capacity(n_major + n_minor);
    for (class, count) in [(0u8, n_major), (1u8, n_minor)] {
        for _ in 0..count {
            let row: Vec<T> = (0..d)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    T::lit(z + if class == 1 { shift } else { 0.0 })
                })
                .collect();
            rows.push(row);
            labels.push(class);
        }
    }
    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.shuffle(&mut rng);
    let rows: Vec<Vec<T>> = order.iter().map(|&i| rows[i].clone()).collect();
    let labels: Vec<u8> = order.iter().map(|&i| labels[i]).collect();
    let names = (0..d).map(|j| format!("f{j}")).collect();
    TabularDataset::new(rows, labels, names)
}

/// Summary written next to every run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub n_rows: usize,
    pub n_features: usize,
    pub class_counts: [usize; 2],
    pub label_names: Option<[String; 2]>,
    pub normalization: Option<NormalizationParams<f64>>,
    pub content_hash: String,
}

impl DatasetManifest {
    pub fn describe<T: Scalar>(ds: &TabularDataset<T>, norm: Option<&NormalizationParams<T>>) -> Self {
        Self {
            n_rows: ds.n_rows(),
            n_features: ds.n_features(),
            class_counts: ds.class_counts(),
            label_names: ds.label_names().cloned(),
            normalization: norm.map(|p| p.cast()),
            content_hash: ds.content_hash(),
        }
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}

/// Writes a dataset back out as CSV (label column last, using the original
/// label spellings when known).
pub fn write_csv<T: Scalar>(ds: &TabularDataset<T>, path: impl AsRef<Path>, label_column: &str) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CoreError::Parse { line: 0, message: e.to_string() })?;
    let mut header: Vec<String> = ds.feature_names().to_vec();
    header.push(label_column.to_string());
    let csv_err = |e: csv::Error| CoreError::Parse { line: 0, message: e.to_string() };
    w.write_record(&header).map_err(csv_err)?;
    for (i, row) in ds.rows().enumerate() {
        let mut rec: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        let l = ds.labels()[i];
        rec.push(match ds.label_names() {
            Some(names) => names[l as usize].clone(),
            None => l.to_string(),
        });
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

//! SMOTE and ADASYN oversampling.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::data::TabularDataset;
use crate::error::{CoreError, Result};
use crate::scalar::Scalar;
use crate::seed::rng_from_seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OversampleConfig {
    pub k_neighbors: usize,
    pub seed: u64,
}

impl Default for OversampleConfig {
    fn default() -> Self {
        Self { k_neighbors: 5, seed: 0 }
    }
}

/// One interpolated row: `base + lambda * (neighbor - base)`, where `base`
/// and `neighbor` index rows of the source dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticRow<T> {
    pub values: Vec<T>,
    pub base: usize,
    pub neighbor: usize,
    pub lambda: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OversampleOutput<T> {
    pub rows: Vec<SyntheticRow<T>>,
    /// Per-minority-row generation counts (ADASYN only; uniform for SMOTE).
    pub allocation: Vec<usize>,
    pub warning: Option<String>,
}

impl<T: Scalar> OversampleOutput<T> {
    pub fn values(&self) -> Vec<Vec<T>> {
        self.rows.iter().map(|r| r.values.clone()).collect()
    }
}

fn sq_dist<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum()
}

/// Indices (into `pool`) of the `k` nearest rows to `query`, skipping
/// `exclude`. Ties are resolved by pool order.
fn k_nearest<T: Scalar>(ds: &TabularDataset<T>, query: usize, pool: &[usize], k: usize) -> Vec<usize> {
    let q = ds.row(query);
    let mut cand: Vec<(T, usize)> = pool
        .iter()
        .filter(|&&i| i != query)
        .map(|&i| (sq_dist(q, ds.row(i)), i))
        .collect();
    cand.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal).then(a.1.cmp(&b.1)));
    cand.truncate(k);
    cand.into_iter().map(|(_, i)| i).collect()
}

fn check_preconditions<T: Scalar>(ds: &TabularDataset<T>, cfg: &OversampleConfig) -> Result<(Vec<usize>, usize)> {
    let minority: Vec<usize> = (0..ds.n_rows()).filter(|&i| ds.labels()[i] == 1).collect();
    if cfg.k_neighbors == 0 || minority.len() <= cfg.k_neighbors {
        return Err(CoreError::InvalidArgument(format!(
            "oversampling needs more minority rows ({}) than neighbours ({})",
            minority.len(),
            cfg.k_neighbors
        )));
    }
    let [n0, n1] = ds.class_counts();
    Ok((minority, n0.saturating_sub(n1)))
}

fn interpolate<T: Scalar>(ds: &TabularDataset<T>, base: usize, neighbor: usize, lambda: T) -> SyntheticRow<T> {
    let a = ds.row(base);
    let b = ds.row(neighbor);
    let values = a.iter().zip(b).map(|(&x, &y)| x + lambda * (y - x)).collect();
    SyntheticRow { values, base, neighbor, lambda }
}

/// Synthesizes `majority - minority` rows, each on the segment between a
/// random minority row and one of its `k` nearest minority neighbours.
pub fn smote<T: Scalar>(ds: &TabularDataset<T>, cfg: &OversampleConfig) -> Result<OversampleOutput<T>> {
    let (minority, gap) = check_preconditions(ds, cfg)?;
    let neighbours: Vec<Vec<usize>> = minority.iter().map(|&i| k_nearest(ds, i, &minority, cfg.k_neighbors)).collect();
    let mut rng = rng_from_seed(cfg.seed);
    let mut allocation = vec![0; minority.len()];
    let mut rows = Vec::with_capacity(gap);
    for _ in 0..gap {
        let pick = rng.random_range(0..minority.len());
        let nn = neighbours[pick][rng.random_range(0..neighbours[pick].len())];
        let lambda = T::lit(rng.random::<f64>());
        allocation[pick] += 1;
        rows.push(interpolate(ds, minority[pick], nn, lambda));
    }
    Ok(OversampleOutput { rows, allocation, warning: None })
}

/// Splits `total` proportionally to `weights` with largest-remainder
/// rounding; remainder ties go to the lower index.
pub fn largest_remainder(weights: &[f64], total: usize) -> Vec<usize> {
    let sum: f64 = weights.iter().sum();
    if weights.is_empty() || sum <= 0.0 {
        return vec![0; weights.len()];
    }
    let quotas: Vec<f64> = weights.iter().map(|w| w / sum * total as f64).collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - quotas[a].floor();
        let rb = quotas[b] - quotas[b].floor();
        rb.partial_cmp(&ra).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b))
    });
    for &i in order.iter().take(total.saturating_sub(assigned)) {
        counts[i] += 1;
    }
    counts
}

/// Per-minority-row difficulty: share of majority rows among its `k`
/// nearest neighbours in the full dataset.
pub fn adasyn_difficulty<T: Scalar>(ds: &TabularDataset<T>, k: usize) -> Vec<f64> {
    let all: Vec<usize> = (0..ds.n_rows()).collect();
    (0..ds.n_rows())
        .filter(|&i| ds.labels()[i] == 1)
        .map(|i| {
            let nn = k_nearest(ds, i, &all, k);
            nn.iter().filter(|&&j| ds.labels()[j] == 0).count() as f64 / k as f64
        })
        .collect()
}

/// ADASYN: generation budget spread over minority rows in proportion to
/// their difficulty, interpolating towards minority neighbours as SMOTE does.
/// When no minority row has a majority neighbour the budget is spread evenly.
pub fn adasyn<T: Scalar>(ds: &TabularDataset<T>, cfg: &OversampleConfig) -> Result<OversampleOutput<T>> {
    let (minority, gap) = check_preconditions(ds, cfg)?;
    let difficulty = adasyn_difficulty(ds, cfg.k_neighbors);
    let mut warning = None;
    let allocation = if difficulty.iter().all(|&r| r == 0.0) {
        warning = Some("no minority row has majority neighbours; using uniform allocation".to_string());
        largest_remainder(&vec![1.0; minority.len()], gap)
    } else {
        largest_remainder(&difficulty, gap)
    };
    let neighbours: Vec<Vec<usize>> = minority.iter().map(|&i| k_nearest(ds, i, &minority, cfg.k_neighbors)).collect();
    let mut rng = rng_from_seed(cfg.seed);
    let mut rows = Vec::with_capacity(gap);
    for (pick, &count) in allocation.iter().enumerate() {
        for _ in 0..count {
            let nn = neighbours[pick][rng.random_range(0..neighbours[pick].len())];
            let lambda = T::lit(rng.random::<f64>());
            rows.push(interpolate(ds, minority[pick], nn, lambda));
        }
    }
    Ok(OversampleOutput { rows, allocation, warning })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dataset(rows: Vec<Vec<f64>>, labels: Vec<u8>) -> TabularDataset<f64> {
        let d = rows[0].len();
        TabularDataset::new(rows, labels, (0..d).map(|j| format!("x{j}")).collect()).unwrap()
    }

    #[test]
    fn two_points_stay_on_segment() {
        let mut rows = vec![vec![0.0, 0.0]; 6];
        rows.push(vec![1.0, 2.0]);
        rows.push(vec![4.0, -1.0]);
        let mut labels = vec![0; 6];
        labels.extend([1, 1]);
        let ds = dataset(rows, labels);
        let out = smote(&ds, &OversampleConfig { k_neighbors: 1, seed: 3 }).unwrap();
        assert_eq!(out.rows.len(), 4);
        let a = [1.0, 2.0];
        let b = [4.0, -1.0];
        let dist = |p: &[f64], q: &[f64]| sq_dist(p, q).sqrt();
        for s in &out.rows {
            assert!((dist(&s.values, &a) + dist(&s.values, &b) - dist(&a, &b)).abs() < 1e-9);
        }
    }

    #[test]
    fn identical_minority_points() {
        let mut rows = vec![vec![5.0, 5.0]; 10];
        rows.extend(vec![vec![1.0, 1.0]; 3]);
        let mut labels = vec![0; 10];
        labels.extend([1, 1, 1]);
        let out = smote(&dataset(rows, labels), &OversampleConfig { k_neighbors: 2, seed: 0 }).unwrap();
        assert_eq!(out.rows.len(), 7);
        assert!(out.rows.iter().all(|r| r.values == vec![1.0, 1.0]));
    }

    #[test]
    fn precondition() {
        let ds = dataset(vec![vec![0.0], vec![1.0], vec![2.0]], vec![0, 0, 1]);
        assert!(smote(&ds, &OversampleConfig { k_neighbors: 1, seed: 0 }).is_err());
        assert!(adasyn(&ds, &OversampleConfig { k_neighbors: 1, seed: 0 }).is_err());
    }

    #[test]
    fn lone_minority_has_full_difficulty() {
        // Minority at 0 with majority at 0.1, 0.2, 0.3; another minority far away.
        let ds = dataset(
            vec![vec![0.0], vec![0.1], vec![0.2], vec![0.3], vec![50.0], vec![51.0], vec![52.0], vec![53.0], vec![9.0]],
            vec![1, 0, 0, 0, 1, 1, 1, 0, 0],
        );
        let r = adasyn_difficulty(&ds, 3);
        assert_eq!(r[0], 1.0);
    }

    #[test]
    fn uniform_fallback() {
        let mut rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        rows.extend((0..4).map(|i| vec![1000.0 + i as f64]));
        let mut labels = vec![0; 10];
        labels.extend([1; 4]);
        let out = adasyn(&dataset(rows, labels), &OversampleConfig { k_neighbors: 2, seed: 1 }).unwrap();
        assert!(out.warning.is_some());
        assert_eq!(out.allocation, vec![2, 2, 1, 1]);
        assert_eq!(out.rows.len(), 6);
    }

    #[test]
    fn largest_remainder_rounding() {
        assert_eq!(largest_remainder(&[1.0, 1.0, 1.0], 4), vec![2, 1, 1]);
        assert_eq!(largest_remainder(&[0.5, 0.25, 0.25], 5), vec![3, 1, 1]);
        assert_eq!(largest_remainder(&[0.0, 0.0], 3), vec![0, 0]);
        assert_eq!(largest_remainder(&[2.0, 1.0], 0), vec![0, 0]);
    }
}

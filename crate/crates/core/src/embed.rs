//! Exact t-SNE over the features of a dataset (the rows of the transposed
//! data matrix), producing one planar position per feature.

use std::path::Path;

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::TabularDataset;
use crate::error::{CoreError, Result};
use crate::scalar::Scalar;
use crate::seed::rng_from_seed;

const PERPLEXITY_TOL: f64 = 1e-4;
const MAX_BISECTION_STEPS: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbeddingConfig {
    pub perplexity: f64,
    pub learning_rate: f64,
    pub iterations: usize,
    pub early_exaggeration_factor: f64,
    pub exaggeration_iters: usize,
    pub momentum: f64,
    pub final_momentum: f64,
    pub momentum_switch_iter: usize,
    pub seed: u64,
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        Self {
            perplexity: 30.0,
            learning_rate: 200.0,
            iterations: 1000,
            early_exaggeration_factor: 12.0,
            exaggeration_iters: 250,
            momentum: 0.5,
            final_momentum: 0.8,
            momentum_switch_iter: 250,
            seed: 0,
        }
    }
}

impl EmbeddingConfig {
    /// Perplexity actually used for `d` features: the configured value,
    /// pulled down to `(d - 1) / 3` (but not below 1.5) when `d` is small.
    pub fn effective_perplexity(&self, d: usize) -> f64 {
        let cap = (d as f64 - 1.0) / 3.0;
        if self.perplexity >= cap {
            cap.max(1.5).min(d as f64 - 1.0)
        } else {
            self.perplexity
        }
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        let p = self.effective_perplexity(d);
        if !(p > 1.0 && p < d as f64) {
            return Err(CoreError::InvalidArgument(format!("perplexity {p} must lie in (1, {d})")));
        }
        if self.exaggeration_iters > self.iterations {
            return Err(CoreError::InvalidArgument("exaggeration_iters exceeds iterations".into()));
        }
        Ok(())
    }
}

/// Symmetric joint affinity matrix, row-major `n × n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Affinities<T> {
    pub n: usize,
    pub values: Vec<T>,
}

impl<T: Scalar> Affinities<T> {
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.values[i * self.n + j]
    }

    pub fn total(&self) -> T {
        self.values.iter().copied().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct FeatureEmbedding<T> {
    pub positions: Vec<[T; 2]>,
    pub final_kl: T,
    /// KL divergence (against the unexaggerated affinities) when early
    /// exaggeration ended.
    pub kl_after_exaggeration: Option<T>,
}

pub fn squared_distances<T: Scalar>(points: &[Vec<T>]) -> Vec<T> {
    let n = points.len();
    let mut out = vec![T::zero(); n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d: T = points[i].iter().zip(&points[j]).map(|(&a, &b)| (a - b) * (a - b)).sum();
            out[i * n + j] = d;
            out[j * n + i] = d;
        }
    }
    out
}

/// Conditional distribution `p(j | i)` for squared distances `dist` (the
/// entry for `i` itself is ignored) at precision `beta`. Returns the
/// distribution and its natural-log entropy.
pub fn conditional_row<T: Scalar>(dist: &[T], i: usize, beta: T) -> (Vec<T>, T) {
    let dmin = dist
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, &d)| d)
        .fold(T::infinity(), T::min);
    let mut p: Vec<T> = dist
        .iter()
        .enumerate()
        .map(|(j, &d)| if j == i { T::zero() } else { (-(d - dmin) * beta).exp() })
        .collect();
    let sum: T = p.iter().copied().sum();
    let mut weighted = T::zero();
    for (j, v) in p.iter_mut().enumerate() {
        if j != i {
            weighted += (dist[j] - dmin) * *v;
        }
        *v /= sum;
    }
    let entropy = sum.ln() + beta * weighted / sum;
    (p, entropy)
}

/// Uniform distribution over the nearest neighbours of `i` (the `beta → ∞` limit).
fn nearest_tie_row<T: Scalar>(dist: &[T], i: usize) -> Vec<T> {
    let dmin = dist
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, &d)| d)
        .fold(T::infinity(), T::min);
    let ties = dist.iter().enumerate().filter(|&(j, &d)| j != i && d == dmin).count();
    let w = T::one() / T::from_usize_lossy(ties);
    dist.iter().enumerate().map(|(j, &d)| if j != i && d == dmin { w } else { T::zero() }).collect()
}

/// Finds the precision for row `i` whose conditional perplexity matches
/// `perplexity`. Targets outside the reachable range (set by distance ties)
/// resolve to the corresponding limiting distribution.
pub fn calibrate_row<T: Scalar>(dist: &[T], i: usize, perplexity: T) -> Result<Vec<T>> {
    let n = dist.len();
    let others = T::from_usize_lossy(n - 1);
    let dmin = dist.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &d)| d).fold(T::infinity(), T::min);
    let dmax = dist.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &d)| d).fold(T::neg_infinity(), T::max);
    let uniform = || -> Vec<T> {
        (0..n).map(|j| if j == i { T::zero() } else { T::one() / others }).collect()
    };
    if dmax - dmin <= T::tiny() || perplexity >= others {
        return Ok(uniform());
    }
    let ties = dist.iter().enumerate().filter(|&(j, &d)| j != i && d == dmin).count();
    if perplexity <= T::from_usize_lossy(ties) {
        return Ok(nearest_tie_row(dist, i));
    }

    let tol = T::lit(PERPLEXITY_TOL);
    let mean_gap = dist
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, &d)| d - dmin)
        .sum::<T>()
        / others;
    let mut beta = T::one() / mean_gap;
    let mut lo: Option<T> = None;
    let mut hi: Option<T> = None;
    let two = T::lit(2.0);
    for _ in 0..MAX_BISECTION_STEPS {
        let (p, h) = conditional_row(dist, i, beta);
        let perp = h.exp();
        if (perp - perplexity).abs() < tol {
            return Ok(p);
        }
        if perp > perplexity {
            lo = Some(beta);
            beta = match hi {
                Some(h) => (beta + h) / two,
                None => beta * two,
            };
        } else {
            hi = Some(beta);
            beta = match lo {
                Some(l) => (beta + l) / two,
                None => beta / two,
            };
        }
    }
    Err(CoreError::BisectionDiverged { feature: i })
}

/// Joint affinities for the rows of `feature_matrix` (one row per feature):
/// per-row Gaussian bandwidths matched to `perplexity`, symmetrized as
/// `(p(j|i) + p(i|j)) / 2d`.
pub fn calibrate_affinities<T: Scalar>(feature_matrix: &[Vec<T>], perplexity: T) -> Result<Affinities<T>> {
    let n = feature_matrix.len();
    if n < 3 {
        return Err(CoreError::InvalidArgument(format!("need at least 3 features, got {n}")));
    }
    if perplexity >= T::from_usize_lossy(n) || perplexity <= T::one() {
        return Err(CoreError::InvalidArgument(format!("perplexity {perplexity} must lie in (1, {n})")));
    }
    let dist = squared_distances(feature_matrix);
    let mut cond = vec![T::zero(); n * n];
    for i in 0..n {
        let row = calibrate_row(&dist[i * n..(i + 1) * n], i, perplexity)?;
        cond[i * n..(i + 1) * n].copy_from_slice(&row);
    }
    let denom = T::lit(2.0) * T::from_usize_lossy(n);
    let mut values = vec![T::zero(); n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                values[i * n + j] = (cond[i * n + j] + cond[j * n + i]) / denom;
            }
        }
    }
    Ok(Affinities { n, values })
}

fn student_kernel<T: Scalar>(y: &[[T; 2]]) -> (Vec<T>, T) {
    let n = y.len();
    let mut num = vec![T::zero(); n * n];
    let mut z = T::zero();
    for i in 0..n {
        for j in (i + 1)..n {
            let dx = y[i][0] - y[j][0];
            let dy = y[i][1] - y[j][1];
            let q = T::one() / (T::one() + dx * dx + dy * dy);
            num[i * n + j] = q;
            num[j * n + i] = q;
            z += q + q;
        }
    }
    (num, z)
}

/// `KL(P ‖ Q)` for the Student-t similarities of `positions`.
pub fn kl_divergence<T: Scalar>(p: &Affinities<T>, positions: &[[T; 2]]) -> T {
    let (num, z) = student_kernel(positions);
    let floor = T::lit(1e-300).max(T::min_positive_value());
    let mut kl = T::zero();
    for (k, &pij) in p.values.iter().enumerate() {
        if pij > T::zero() {
            let q = (num[k] / z).max(floor);
            kl += pij * (pij / q).ln();
        }
    }
    kl
}

/// Gradient of `KL(exaggeration·P ‖ Q)` with respect to each position.
pub fn kl_gradient<T: Scalar>(p: &Affinities<T>, positions: &[[T; 2]], exaggeration: T) -> Vec<[T; 2]> {
    let n = positions.len();
    let (num, z) = student_kernel(positions);
    let four = T::lit(4.0);
    let mut grad = vec![[T::zero(); 2]; n];
    for i in 0..n {
        let mut g = [T::zero(); 2];
        for j in 0..n {
            if i == j {
                continue;
            }
            let k = i * n + j;
            let w = (exaggeration * p.values[k] - num[k] / z) * num[k];
            g[0] += w * (positions[i][0] - positions[j][0]);
            g[1] += w * (positions[i][1] - positions[j][1]);
        }
        grad[i] = [four * g[0], four * g[1]];
    }
    grad
}

/// Gradient descent with momentum and per-coordinate gains on `KL(P ‖ Q)`.
pub fn tsne_optimize<T: Scalar>(p: &Affinities<T>, config: &EmbeddingConfig) -> Result<FeatureEmbedding<T>> {
    let n = p.n;
    let mut rng = rng_from_seed(config.seed);
    let mut y: Vec<[T; 2]> = (0..n)
        .map(|_| {
            let a: f64 = StandardNormal.sample(&mut rng);
            let b: f64 = StandardNormal.sample(&mut rng);
            [T::lit(1e-2 * a), T::lit(1e-2 * b)]
        })
        .collect();
    let mut update = vec![[T::zero(); 2]; n];
    let mut gains = vec![[T::one(); 2]; n];
    let lr = T::lit(config.learning_rate);
    let min_gain = T::lit(0.01);
    let mut kl_after_exaggeration = None;

    for it in 0..config.iterations {
        if it == config.exaggeration_iters && config.exaggeration_iters > 0 {
            kl_after_exaggeration = Some(kl_divergence(p, &y));
        }
        let exaggeration = if it < config.exaggeration_iters {
            T::lit(config.early_exaggeration_factor)
        } else {
            T::one()
        };
        let momentum = T::lit(if it < config.momentum_switch_iter { config.momentum } else { config.final_momentum });
        let grad = kl_gradient(p, &y, exaggeration);
        if grad.iter().any(|g| !g[0].is_finite() || !g[1].is_finite()) {
            return Err(CoreError::NonFiniteGradient { iteration: it });
        }
        for i in 0..n {
            for c in 0..2 {
                let same_sign = (grad[i][c] > T::zero()) == (update[i][c] > T::zero());
                gains[i][c] = if same_sign { gains[i][c] * T::lit(0.8) } else { gains[i][c] + T::lit(0.2) };
                gains[i][c] = gains[i][c].max(min_gain);
                update[i][c] = momentum * update[i][c] - lr * gains[i][c] * grad[i][c];
                y[i][c] += update[i][c];
            }
        }
        let nf = T::from_usize_lossy(n);
        let mean = [y.iter().map(|v| v[0]).sum::<T>() / nf, y.iter().map(|v| v[1]).sum::<T>() / nf];
        for v in &mut y {
            v[0] -= mean[0];
            v[1] -= mean[1];
        }
    }
    if config.exaggeration_iters == config.iterations && config.iterations > 0 {
        kl_after_exaggeration = Some(kl_divergence(p, &y));
    }
    let final_kl = kl_divergence(p, &y).max(T::zero());
    Ok(FeatureEmbedding { positions: y, final_kl, kl_after_exaggeration })
}

/// Embeds the features of an already normalized dataset. Fewer than three
/// features are laid out on a line without optimization.
pub fn embed_features<T: Scalar>(ds: &TabularDataset<T>, config: &EmbeddingConfig) -> Result<FeatureEmbedding<T>> {
    let d = ds.n_features();
    if d < 3 {
        let positions = (0..d).map(|j| [T::from_usize_lossy(j), T::zero()]).collect();
        return Ok(FeatureEmbedding { positions, final_kl: T::zero(), kl_after_exaggeration: None });
    }
    config.validate(d)?;
    let p = calibrate_affinities(&ds.transposed(), T::lit(config.effective_perplexity(d)))?;
    tsne_optimize(&p, config)
}

/// Dumps `(feature_name, x, y)` rows.
pub fn write_embedding_csv<T: Scalar>(names: &[String], emb: &FeatureEmbedding<T>, path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::from("feature_name,x,y\n");
    for (name, p) in names.iter().zip(&emb.positions) {
        out.push_str(&format!("{name},{},{}\n", p[0], p[1]));
    }
    std::fs::write(path, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_rows_uniform() {
        let m = vec![vec![1.0, 2.0, 3.0]; 3];
        let p = calibrate_affinities(&m, 1.5f64).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 0.0 } else { 1.0 / 6.0 };
                assert!((p.get(i, j) - expect).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn affinities_normalized_zero_diagonal() {
        let m: Vec<Vec<f64>> = (0..12).map(|i| (0..5).map(|k| ((i * 7 + k * 3) % 11) as f64 * 0.1).collect()).collect();
        let p = calibrate_affinities(&m, 4.0).unwrap();
        assert!((p.total() - 1.0).abs() < 1e-9);
        for i in 0..12 {
            assert_eq!(p.get(i, i), 0.0);
            for j in 0..12 {
                assert!((p.get(i, j) - p.get(j, i)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn calibrated_rows_hit_target() {
        let m: Vec<Vec<f64>> = (0..9).map(|i| vec![i as f64, (i * i) as f64 * 0.3]).collect();
        let dist = squared_distances(&m);
        for i in 0..9 {
            let row = calibrate_row(&dist[i * 9..(i + 1) * 9], i, 3.0).unwrap();
            let h: f64 = -row.iter().filter(|&&v| v > 0.0).map(|&v| v * v.ln()).sum::<f64>();
            assert!((h.exp() - 3.0).abs() < 1e-4);
        }
    }

    #[test]
    fn rejects_bad_perplexity() {
        let m = vec![vec![0.0], vec![1.0], vec![2.0]];
        assert!(calibrate_affinities(&m, 3.0f64).is_err());
        assert!(calibrate_affinities(&m[..2], 1.5f64).is_err());
    }

    #[test]
    fn effective_perplexity_clamps() {
        let c = EmbeddingConfig::default();
        assert_eq!(c.effective_perplexity(500), 30.0);
        assert_eq!(c.effective_perplexity(64), 21.0);
        assert_eq!(c.effective_perplexity(4), 1.5);
        assert!(c.validate(3).is_ok());
    }

    #[test]
    fn small_feature_counts_skip_optimization() {
        let ds = TabularDataset::new(vec![vec![0.1, 0.2], vec![0.3, 0.4]], vec![0, 1], vec!["a".into(), "b".into()])
            .unwrap();
        let e = embed_features(&ds, &EmbeddingConfig::default()).unwrap();
        assert_eq!(e.positions, vec![[0.0, 0.0], [1.0, 0.0]]);
    }

    #[test]
    fn works_in_single_precision() {
        let m: Vec<Vec<f32>> = (0..8).map(|i| vec![i as f32, (i % 3) as f32]).collect();
        let p = calibrate_affinities(&m, 3.0f32).unwrap();
        let cfg = EmbeddingConfig { iterations: 100, exaggeration_iters: 50, momentum_switch_iter: 50, ..Default::default() };
        let e = tsne_optimize(&p, &cfg).unwrap();
        assert!(e.positions.iter().all(|q| q[0].is_finite() && q[1].is_finite()));
    }
}

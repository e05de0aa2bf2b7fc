//! Second-order gradient boosting on the logistic loss with exact greedy splits.

use riga_core::Dataset;
use riga_nn::layers::sigmoid;
use serde::{Deserialize, Serialize};

use crate::error::{ClassifyError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GbdtConfig {
    pub n_trees: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub min_samples_leaf: usize,
    pub lambda: f64,
    /// Recorded for manifests; exact greedy training draws no randomness.
    pub seed: u64,
}

impl Default for GbdtConfig {
    fn default() -> Self {
        Self { n_trees: 100, max_depth: 3, learning_rate: 0.1, min_samples_leaf: 1, lambda: 1.0, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf { value: f64 },
    /// Rows with `x[feature] <= threshold` go left.
    Split { feature: usize, threshold: f64, gain: f64, left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    /// Raw leaf value (before shrinkage) for one row.
    pub fn predict(&self, row: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { value } => return value,
                Node::Split { feature, threshold, left, right, .. } => i = if row[feature] <= threshold { left } else { right },
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gbdt {
    pub base_score: f64,
    pub learning_rate: f64,
    pub trees: Vec<Tree>,
    pub n_features: usize,
}

impl Gbdt {
    pub fn predict_raw(&self, row: &[f64]) -> f64 {
        self.base_score + self.trees.iter().map(|t| self.learning_rate * t.predict(row)).sum::<f64>()
    }

    pub fn predict_proba(&self, row: &[f64]) -> f64 {
        sigmoid(self.predict_raw(row))
    }
}

/// `½ [GL²/(HL+λ) + GR²/(HR+λ) − G²/(H+λ)]`.
pub fn split_gain(gl: f64, hl: f64, gr: f64, hr: f64, lambda: f64) -> f64 {
    let g = gl + gr;
    let h = hl + hr;
    0.5 * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - g * g / (h + lambda))
}

pub fn leaf_value(g: f64, h: f64, lambda: f64) -> f64 {
    -g / (h + lambda)
}

#[derive(Clone, Copy)]
struct Best {
    gain: f64,
    feature: usize,
    threshold: f64,
}

struct Acc {
    g: f64,
    h: f64,
    n: usize,
    last: f64,
    started: bool,
}

/// Grows one tree level by level. `columns[f][i]` is feature `f` of row `i`
/// and `sorted[f]` lists rows by ascending feature value.
fn build_tree(columns: &[Vec<f64>], sorted: &[Vec<usize>], g: &[f64], h: &[f64], cfg: &GbdtConfig) -> Tree {
    let n = g.len();
    let mut node_of = vec![0usize; n];
    let mut stats = vec![(g.iter().sum::<f64>(), h.iter().sum::<f64>(), n)];
    let mut nodes: Vec<Option<Node>> = vec![None];
    let mut frontier = vec![0usize];
    for _ in 0..cfg.max_depth {
        if frontier.is_empty() {
            break;
        }
        let mut slot = vec![usize::MAX; nodes.len()];
        for (s, &nd) in frontier.iter().enumerate() {
            slot[nd] = s;
        }
        let mut best: Vec<Option<Best>> = vec![None; frontier.len()];
        for (f, order) in sorted.iter().enumerate() {
            let col = &columns[f];
            let mut acc: Vec<Acc> = frontier.iter().map(|_| Acc { g: 0.0, h: 0.0, n: 0, last: 0.0, started: false }).collect();
            for &i in order {
                let s = slot[node_of[i]];
                if s == usize::MAX {
                    continue;
                }
                let v = col[i];
                let a = &mut acc[s];
                let (tg, th, tn) = stats[frontier[s]];
                if a.started && v > a.last && a.n >= cfg.min_samples_leaf && tn - a.n >= cfg.min_samples_leaf {
                    let gain = split_gain(a.g, a.h, tg - a.g, th - a.h, cfg.lambda);
                    if best[s].is_none_or(|b| gain > b.gain) {
                        best[s] = Some(Best { gain, feature: f, threshold: a.last });
                    }
                }
                a.g += g[i];
                a.h += h[i];
                a.n += 1;
                a.last = v;
                a.started = true;
            }
        }
        let mut next = Vec::new();
        let mut split_of = vec![None; nodes.len()];
        for (s, &nd) in frontier.iter().enumerate() {
            if let Some(b) = best[s].filter(|b| b.gain > 0.0) {
                let left = nodes.len();
                nodes.push(None);
                nodes.push(None);
                stats.push((0.0, 0.0, 0));
                stats.push((0.0, 0.0, 0));
                nodes[nd] = Some(Node::Split { feature: b.feature, threshold: b.threshold, gain: b.gain, left, right: left + 1 });
                split_of[nd] = Some((b.feature, b.threshold, left));
                next.push(left);
                next.push(left + 1);
            }
        }
        for i in 0..n {
            if let Some((f, t, left)) = split_of.get(node_of[i]).copied().flatten() {
                let child = if columns[f][i] <= t { left } else { left + 1 };
                node_of[i] = child;
                let st = &mut stats[child];
                st.0 += g[i];
                st.1 += h[i];
                st.2 += 1;
            }
        }
        frontier = next;
    }
    let nodes = nodes
        .into_iter()
        .enumerate()
        .map(|(i, n)| n.unwrap_or_else(|| Node::Leaf { value: leaf_value(stats[i].0, stats[i].1, cfg.lambda) }))
        .collect();
    Tree { nodes }
}

/// Fits boosted trees on every row of `train`, synthetic rows included.
pub fn gbdt_train(train: &Dataset, cfg: &GbdtConfig) -> Result<Gbdt> {
    let rows: Vec<Vec<f64>> = train.rows().map(|r| r.to_vec()).collect();
    gbdt_fit(&rows, train.labels(), cfg)
}

/// Fits boosted trees on rows `x` (all of equal width) with binary labels.
/// The base score is the training prior log-odds.
pub fn gbdt_fit(x: &[Vec<f64>], labels: &[u8], cfg: &GbdtConfig) -> Result<Gbdt> {
    if x.len() != labels.len() || x.is_empty() {
        return Err(ClassifyError::InvalidArgument("rows and labels must be non-empty and equally long".into()));
    }
    if cfg.max_depth == 0 || cfg.min_samples_leaf == 0 || cfg.lambda < 0.0 {
        return Err(ClassifyError::InvalidArgument("depth and leaf size must be at least 1; lambda non-negative".into()));
    }
    let n1 = labels.iter().filter(|&&y| y == 1).count();
    let n0 = labels.len() - n1;
    if n0 == 0 || n1 == 0 {
        return Err(ClassifyError::SingleClass);
    }
    let d = x[0].len();
    let columns: Vec<Vec<f64>> = (0..d).map(|f| x.iter().map(|r| r[f]).collect()).collect();
    let sorted: Vec<Vec<usize>> = columns
        .iter()
        .map(|c| {
            let mut idx: Vec<usize> = (0..c.len()).collect();
            idx.sort_by(|&a, &b| c[a].total_cmp(&c[b]).then(a.cmp(&b)));
            idx
        })
        .collect();
    let base_score = (n1 as f64 / n0 as f64).ln();
    let y: Vec<f64> = labels.iter().map(|&v| v as f64).collect();
    let mut raw = vec![base_score; x.len()];
    let mut model = Gbdt { base_score, learning_rate: cfg.learning_rate, trees: Vec::with_capacity(cfg.n_trees), n_features: d };
    let mut g = vec![0.0; x.len()];
    let mut h = vec![0.0; x.len()];
    for _ in 0..cfg.n_trees {
        for i in 0..x.len() {
            let p = sigmoid(raw[i]);
            g[i] = p - y[i];
            h[i] = p * (1.0 - p);
        }
        let tree = build_tree(&columns, &sorted, &g, &h, cfg);
        for (i, r) in raw.iter_mut().enumerate() {
            *r += cfg.learning_rate * tree.predict(&x[i]);
        }
        model.trees.push(tree);
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_row_hand_case() {
        let x = vec![vec![1.0], vec![2.0], vec![3.0], vec![4.0]];
        let cfg = GbdtConfig { n_trees: 1, max_depth: 1, lambda: 1.0, ..Default::default() };
        let m = gbdt_fit(&x, &[0, 0, 1, 1], &cfg).unwrap();
        assert_eq!(m.base_score, 0.0);
        // g = ±0.5, h = 0.25: best cut x <= 2 with gain ½(1/1.5 + 1/1.5).
        match m.trees[0].nodes[0] {
            Node::Split { feature, threshold, gain, left, right } => {
                assert_eq!((feature, threshold), (0, 2.0));
                assert!((gain - 2.0 / 3.0).abs() < 1e-15);
                assert_eq!(m.trees[0].nodes[left], Node::Leaf { value: -1.0 / 1.5 });
                assert_eq!(m.trees[0].nodes[right], Node::Leaf { value: 1.0 / 1.5 });
            }
            ref other => panic!("expected a split, got {other:?}"),
        }
        assert!((split_gain(0.5, 0.25, -0.5, 0.75, 1.0) - 0.5 * (0.2 + 0.25 / 1.75)).abs() < 1e-15);
    }

    #[test]
    fn zero_trees_give_prior() {
        let x = vec![vec![0.0]; 5];
        let m = gbdt_fit(&x, &[0, 0, 0, 1, 1], &GbdtConfig { n_trees: 0, ..Default::default() }).unwrap();
        for r in &x {
            assert_eq!(m.predict_raw(r), (2.0f64 / 3.0).ln());
        }
    }

    #[test]
    fn constant_features_are_prior_only() {
        let x = vec![vec![1.0, 5.0]; 6];
        let m = gbdt_fit(&x, &[0, 1, 0, 1, 0, 0], &GbdtConfig::default()).unwrap();
        assert!(m.trees.iter().all(|t| t.nodes.len() == 1));
        assert!((m.predict_raw(&x[0]) - 0.5f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn min_leaf_respected() {
        let x: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64]).collect();
        let cfg = GbdtConfig { n_trees: 1, max_depth: 1, min_samples_leaf: 3, ..Default::default() };
        let m = gbdt_fit(&x, &[1, 0, 0, 0, 1, 1], &cfg).unwrap();
        if let Node::Split { threshold, .. } = m.trees[0].nodes[0] {
            assert_eq!(threshold, 2.0);
        } else {
            panic!("expected a split");
        }
    }
}

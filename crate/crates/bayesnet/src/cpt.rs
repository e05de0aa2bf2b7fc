//! Conditional probability tables and ancestral sampling.

use riga_core::rng_from_seed;
use serde::{Deserialize, Serialize};

use crate::dag::Dag;
use crate::data::DiscreteData;
use crate::error::{BnError, Result};

const MAX_CONFIGS: usize = 1 << 22;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeCpt {
    pub card: usize,
    pub parents: Vec<usize>,
    pub parent_cards: Vec<usize>,
    /// `configs × card`, row-major; the last parent varies fastest.
    pub probs: Vec<f64>,
}

impl NodeCpt {
    pub fn n_configs(&self) -> usize {
        self.parent_cards.iter().product()
    }

    pub fn config_index(&self, parent_values: &[usize]) -> usize {
        parent_values.iter().zip(&self.parent_cards).fold(0, |acc, (&v, &c)| acc * c + v)
    }

    pub fn distribution(&self, config: usize) -> &[f64] {
        &self.probs[config * self.card..(config + 1) * self.card]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cpt {
    pub names: Vec<String>,
    pub nodes: Vec<NodeCpt>,
}

/// Maximum-likelihood tables with `alpha` added to every cell. A parent
/// configuration with no mass at all gets the uniform distribution.
pub fn fit_cpts(data: &DiscreteData, dag: &Dag, alpha: f64) -> Result<Cpt> {
    if data.names() != dag.names() {
        return Err(BnError::InvalidArgument("graph nodes do not match data columns".into()));
    }
    if !(alpha >= 0.0) {
        return Err(BnError::InvalidArgument("alpha must be non-negative".into()));
    }
    let mut nodes = Vec::with_capacity(dag.n_nodes());
    for v in 0..dag.n_nodes() {
        let parents = dag.parents(v).to_vec();
        let parent_cards: Vec<usize> = parents.iter().map(|&p| data.card(p)).collect();
        let q = parent_cards.iter().try_fold(1usize, |a, &c| a.checked_mul(c).filter(|&x| x <= MAX_CONFIGS));
        let q = q.ok_or_else(|| BnError::InvalidArgument(format!("node {} has too many parent configurations", dag.names()[v])))?;
        let card = data.card(v);
        let mut node = NodeCpt { card, parents, parent_cards, probs: vec![alpha; q * card] };
        let mut pv = vec![0; node.parents.len()];
        for row in 0..data.n_rows() {
            for (k, &p) in node.parents.iter().enumerate() {
                pv[k] = data.value(row, p);
            }
            let c = node.config_index(&pv);
            node.probs[c * card + data.value(row, v)] += 1.0;
        }
        for dist in node.probs.chunks_mut(card) {
            let total: f64 = dist.iter().sum();
            if total > 0.0 {
                dist.iter_mut().for_each(|p| *p /= total);
            } else {
                dist.fill(1.0 / card as f64);
            }
        }
        nodes.push(node);
    }
    Ok(Cpt { names: dag.names().to_vec(), nodes })
}

fn draw(dist: &[f64], rng: &mut impl rand::Rng) -> usize {
    let u: f64 = rng.random::<f64>() * dist.iter().sum::<f64>();
    let mut acc = 0.0;
    for (i, &p) in dist.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    dist.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

/// Ancestral sampling in topological order.
pub fn sample_from_bn(dag: &Dag, cpt: &Cpt, n: usize, seed: u64) -> Result<DiscreteData> {
    if cpt.nodes.len() != dag.n_nodes() || (0..dag.n_nodes()).any(|v| cpt.nodes[v].parents != dag.parents(v)) {
        return Err(BnError::InvalidArgument("tables do not match the graph".into()));
    }
    let order = dag.topological_order();
    let mut rng = rng_from_seed(seed);
    let mut columns = vec![vec![0usize; n]; dag.n_nodes()];
    let mut pv = Vec::new();
    for row in 0..n {
        for &v in &order {
            let node = &cpt.nodes[v];
            pv.clear();
            pv.extend(node.parents.iter().map(|&p| columns[p][row]));
            columns[v][row] = draw(node.distribution(node.config_index(&pv)), &mut rng);
        }
    }
    let cards = cpt.nodes.iter().map(|n| n.card).collect();
    DiscreteData::new(dag.names().to_vec(), cards, columns)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mle_and_smoothing() {
        let names = vec!["a".to_string()];
        let d = DiscreteData::new(names.clone(), vec![2], vec![vec![0, 0, 0, 1]]).unwrap();
        let c = fit_cpts(&d, &Dag::empty(names), 0.0).unwrap();
        assert_eq!(c.nodes[0].probs, [0.75, 0.25]);
    }

    #[test]
    fn unseen_configuration_is_uniform() {
        let names = vec!["a".to_string(), "b".to_string()];
        let d = DiscreteData::new(names.clone(), vec![3, 2], vec![vec![0, 0, 1], vec![0, 1, 1]]).unwrap();
        let dag = Dag::from_edges(names, &[(0, 1)]).unwrap();
        let c = fit_cpts(&d, &dag, 1.0).unwrap();
        assert_eq!(c.nodes[1].distribution(2), [0.5, 0.5]);
        assert_eq!(c.nodes[1].distribution(0), [0.5, 0.5]);
        assert_eq!(c.nodes[1].distribution(1), [1.0 / 3.0, 2.0 / 3.0]);
    }
}

//! BIC scoring: log-likelihood under maximum-likelihood CPTs minus
//! `(d/2)·ln N`. Higher is better.

use std::collections::{BTreeMap, HashMap};

use crate::dag::{Dag, Move};
use crate::data::DiscreteData;
use crate::error::{BnError, Result};

/// Counts of each child value per observed parent configuration, in
/// configuration order so sums are reproducible.
pub fn family_counts(data: &DiscreteData, node: usize, parents: &[usize]) -> BTreeMap<u128, Vec<u64>> {
    let r = data.card(node);
    let mut counts: BTreeMap<u128, Vec<u64>> = BTreeMap::new();
    let child = data.column(node);
    for (row, &x) in child.iter().enumerate() {
        let mut cfg: u128 = 0;
        for &p in parents {
            cfg = cfg * data.card(p) as u128 + data.value(row, p) as u128;
        }
        counts.entry(cfg).or_insert_with(|| vec![0; r])[x] += 1;
    }
    counts
}

/// `(r − 1)·q` for a node with `r` states and `q` parent configurations.
pub fn free_params(data: &DiscreteData, node: usize, parents: &[usize]) -> f64 {
    let q: f64 = parents.iter().map(|&p| data.card(p) as f64).product();
    (data.card(node) as f64 - 1.0) * q
}

pub fn family_loglik(data: &DiscreteData, node: usize, parents: &[usize]) -> f64 {
    let mut ll = 0.0;
    for counts in family_counts(data, node, parents).values() {
        let total: u64 = counts.iter().sum();
        for &c in counts.iter().filter(|&&c| c > 0) {
            ll += c as f64 * (c as f64 / total as f64).ln();
        }
    }
    ll
}

pub fn family_score(data: &DiscreteData, node: usize, parents: &[usize]) -> f64 {
    let n = data.n_rows();
    let penalty = if n == 0 { 0.0 } else { 0.5 * free_params(data, node, parents) * (n as f64).ln() };
    family_loglik(data, node, parents) - penalty
}

fn check(data: &DiscreteData, dag: &Dag) -> Result<()> {
    if data.names() != dag.names() {
        return Err(BnError::InvalidArgument("graph nodes do not match data columns".into()));
    }
    Ok(())
}

pub fn bic_score(data: &DiscreteData, dag: &Dag) -> Result<f64> {
    check(data, dag)?;
    Ok((0..dag.n_nodes()).map(|v| family_score(data, v, dag.parents(v))).sum())
}

/// Memoized family scores for search.
pub struct ScoreCache<'a> {
    data: &'a DiscreteData,
    families: HashMap<(usize, Vec<usize>), f64>,
}

impl<'a> ScoreCache<'a> {
    pub fn new(data: &'a DiscreteData) -> Self {
        Self { data, families: HashMap::new() }
    }

    pub fn data(&self) -> &'a DiscreteData {
        self.data
    }

    pub fn family(&mut self, node: usize, parents: &[usize]) -> f64 {
        let data = self.data;
        *self.families.entry((node, parents.to_vec())).or_insert_with(|| family_score(data, node, parents))
    }

    pub fn score(&mut self, dag: &Dag) -> Result<f64> {
        check(self.data, dag)?;
        Ok((0..dag.n_nodes()).map(|v| self.family(v, dag.parents(v))).sum())
    }

    pub fn len(&self) -> usize {
        self.families.len()
    }

    pub fn is_empty(&self) -> bool {
        self.families.is_empty()
    }

    /// Score change from applying `mv`, rescoring only the families it touches.
    pub fn delta(&mut self, dag: &Dag, mv: Move) -> f64 {
        let with = |ps: &[usize], x: usize| {
            let mut out = ps.to_vec();
            if let Err(i) = out.binary_search(&x) {
                out.insert(i, x);
            }
            out
        };
        let without = |ps: &[usize], x: usize| ps.iter().copied().filter(|&p| p != x).collect::<Vec<_>>();
        match mv {
            Move::Add(u, v) => {
                let ps = dag.parents(v);
                self.family(v, &with(ps, u)) - self.family(v, ps)
            }
            Move::Delete(u, v) => {
                let ps = dag.parents(v);
                self.family(v, &without(ps, u)) - self.family(v, ps)
            }
            Move::Reverse(u, v) => {
                let (pv, pu) = (dag.parents(v), dag.parents(u));
                self.family(v, &without(pv, u)) - self.family(v, pv) + self.family(u, &with(pu, v)) - self.family(u, pu)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_binary_fixture() {
        let d = DiscreteData::new(vec!["a".into()], vec![2], vec![vec![0, 1, 0, 1]]).unwrap();
        let s = bic_score(&d, &Dag::empty(vec!["a".into()])).unwrap();
        assert!((s - (4.0 * 0.5f64.ln() - 0.5 * 4f64.ln())).abs() < 1e-12);
        assert!((s + 3.46574).abs() < 1e-5);
    }

    #[test]
    fn constant_variable_scores_penalty_only() {
        let d = DiscreteData::new(vec!["a".into()], vec![2], vec![vec![1; 10]]).unwrap();
        let s = bic_score(&d, &Dag::empty(vec!["a".into()])).unwrap();
        assert!((s + 0.5 * 10f64.ln()).abs() < 1e-12);
    }
}

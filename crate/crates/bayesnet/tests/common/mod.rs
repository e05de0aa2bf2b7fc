#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use riga_bayesnet::{fit_cpts, sample_from_bn, Cpt, Dag, DiscreteData, NodeCpt};

pub fn names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("x{i}")).collect()
}

/// Every DAG on `n` nodes: each unordered pair is absent, forward or
/// backward, and cyclic combinations are discarded.
pub fn all_dags(n: usize) -> Vec<Dag> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    let mut out = Vec::new();
    for code in 0..3usize.pow(pairs.len() as u32) {
        let mut c = code;
        let mut edges = Vec::new();
        for &(a, b) in &pairs {
            match c % 3 {
                1 => edges.push((a, b)),
                2 => edges.push((b, a)),
                _ => {}
            }
            c /= 3;
        }
        if let Ok(d) = Dag::from_edges(names(n), &edges) {
            out.push(d);
        }
    }
    out
}

pub fn random_dag(n: usize, p: f64, rng: &mut impl Rng) -> Dag {
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p {
                edges.push((order[i], order[j]));
            }
        }
    }
    Dag::from_edges(names(n), &edges).unwrap()
}

pub fn random_data(n_rows: usize, cards: &[usize], seed: u64) -> DiscreteData {
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let columns = cards.iter().map(|&c| (0..n_rows).map(|_| rng.random_range(0..c)).collect()).collect();
    DiscreteData::new(names(cards.len()), cards.to_vec(), columns).unwrap()
}

/// Binary noisy-OR network: a node with parents is 1 with probability
/// `strength` when any parent is 1 and `1 - strength` otherwise; roots are
/// fair coins.
pub fn strong_cpt(dag: &Dag, strength: f64) -> Cpt {
    let dummy = DiscreteData::new(dag.names().to_vec(), vec![2; dag.n_nodes()], vec![vec![0]; dag.n_nodes()]).unwrap();
    let mut cpt = fit_cpts(&dummy, dag, 1.0).unwrap();
    for node in cpt.nodes.iter_mut() {
        let NodeCpt { parents, parent_cards, probs, .. } = node;
        let q: usize = parent_cards.iter().product();
        for c in 0..q {
            let (p0, p1) = if parents.is_empty() { (0.5, 0.5) } else if c == 0 { (strength, 1.0 - strength) } else { (1.0 - strength, strength) };
            probs[2 * c] = p0;
            probs[2 * c + 1] = p1;
        }
    }
    cpt
}

pub fn sample(dag: &Dag, cpt: &Cpt, n: usize, seed: u64) -> DiscreteData {
    sample_from_bn(dag, cpt, n, seed).unwrap()
}

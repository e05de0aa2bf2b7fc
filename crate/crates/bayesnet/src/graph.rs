//! Markov blankets and Markov-equivalence classes.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::dag::Dag;

/// Parents, children and the children's other parents of `target`.
pub fn markov_blanket(dag: &Dag, target: usize) -> BTreeSet<usize> {
    let mut mb: BTreeSet<usize> = dag.parents(target).iter().copied().collect();
    for c in dag.children(target) {
        mb.insert(c);
        mb.extend(dag.parents(c).iter().copied());
    }
    mb.remove(&target);
    mb
}

/// Completed partially directed graph: compelled edges stay directed, the
/// rest are undirected (stored with the smaller index first).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cpdag {
    pub directed: BTreeSet<(usize, usize)>,
    pub undirected: BTreeSet<(usize, usize)>,
}

fn key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

pub fn skeleton(dag: &Dag) -> BTreeSet<(usize, usize)> {
    dag.edges().into_iter().map(|(u, v)| key(u, v)).collect()
}

/// Unshielded colliders `a → c ← b` as `(a, c, b)` with `a < b`.
pub fn v_structures(dag: &Dag) -> BTreeSet<(usize, usize, usize)> {
    let mut out = BTreeSet::new();
    for c in 0..dag.n_nodes() {
        let ps = dag.parents(c);
        for (i, &a) in ps.iter().enumerate() {
            for &b in &ps[i + 1..] {
                if !dag.has_edge(a, b) && !dag.has_edge(b, a) {
                    out.insert((a, c, b));
                }
            }
        }
    }
    out
}

/// Orients v-structures, then applies Meek's rules 1 to 3 to a fixpoint.
pub fn cpdag(dag: &Dag) -> Cpdag {
    let skel = skeleton(dag);
    let adjacent = |a: usize, b: usize| skel.contains(&key(a, b));
    let mut directed: BTreeSet<(usize, usize)> = BTreeSet::new();
    for (a, c, b) in v_structures(dag) {
        directed.insert((a, c));
        directed.insert((b, c));
    }
    let n = dag.n_nodes();
    loop {
        let undirected: Vec<(usize, usize)> =
            skel.iter().copied().filter(|&(a, b)| !directed.contains(&(a, b)) && !directed.contains(&(b, a))).collect();
        let mut changed = false;
        for (x, y) in undirected {
            for (from, to) in [(x, y), (y, x)] {
                if directed.contains(&(to, from)) || directed.contains(&(from, to)) {
                    continue;
                }
                let is_und = |a: usize, b: usize| adjacent(a, b) && !directed.contains(&(a, b)) && !directed.contains(&(b, a));
                // R1: k → from − to with k, to non-adjacent.
                let r1 = (0..n).any(|k| directed.contains(&(k, from)) && k != to && !adjacent(k, to));
                // R2: from → k → to.
                let r2 = (0..n).any(|k| directed.contains(&(from, k)) && directed.contains(&(k, to)));
                // R3: from − k1 → to, from − k2 → to, k1 and k2 non-adjacent.
                let ks: Vec<usize> = (0..n).filter(|&k| is_und(from, k) && directed.contains(&(k, to))).collect();
                let r3 = ks.iter().enumerate().any(|(i, &k1)| ks[i + 1..].iter().any(|&k2| !adjacent(k1, k2)));
                if r1 || r2 || r3 {
                    directed.insert((from, to));
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let undirected = skel.into_iter().filter(|&(a, b)| !directed.contains(&(a, b)) && !directed.contains(&(b, a))).collect();
    Cpdag { directed, undirected }
}

/// Same skeleton and same v-structures.
pub fn markov_equivalent(a: &Dag, b: &Dag) -> bool {
    a.n_nodes() == b.n_nodes() && skeleton(a) == skeleton(b) && v_structures(a) == v_structures(b)
}

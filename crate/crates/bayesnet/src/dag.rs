//! Directed acyclic graphs and the single-edge search neighbourhood.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{BnError, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dag {
    names: Vec<String>,
    /// Sorted parent indices per node.
    parents: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Move {
    Add(usize, usize),
    Delete(usize, usize),
    /// Turns `from → to` into `to → from`.
    Reverse(usize, usize),
}

impl Move {
    /// The move that undoes this one.
    pub fn inverse(self) -> Move {
        match self {
            Move::Add(u, v) => Move::Delete(u, v),
            Move::Delete(u, v) => Move::Add(u, v),
            Move::Reverse(u, v) => Move::Reverse(v, u),
        }
    }
}

impl Dag {
    pub fn empty(names: Vec<String>) -> Self {
        let n = names.len();
        Self { names, parents: vec![Vec::new(); n] }
    }

    /// Builds from `(parent, child)` index pairs, rejecting cycles.
    pub fn from_edges(names: Vec<String>, edges: &[(usize, usize)]) -> Result<Self> {
        let mut dag = Self::empty(names);
        for &(u, v) in edges {
            dag.add_edge(u, v)?;
        }
        Ok(dag)
    }

    pub fn n_nodes(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.names.iter().position(|n| n == name).ok_or_else(|| BnError::UnknownNode(name.to_string()))
    }

    pub fn parents(&self, v: usize) -> &[usize] {
        &self.parents[v]
    }

    pub fn children(&self, u: usize) -> Vec<usize> {
        (0..self.n_nodes()).filter(|&v| self.has_edge(u, v)).collect()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.parents[v].binary_search(&u).is_ok()
    }

    /// `(parent, child)` pairs ordered by child, then parent.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.parents.iter().enumerate().flat_map(|(v, ps)| ps.iter().map(move |&u| (u, v))).collect()
    }

    pub fn n_edges(&self) -> usize {
        self.parents.iter().map(Vec::len).sum()
    }

    /// True when a directed path `from ⇝ to` exists (a node reaches itself).
    pub fn has_path(&self, from: usize, to: usize) -> bool {
        let mut seen = vec![false; self.n_nodes()];
        let mut stack = vec![from];
        while let Some(x) = stack.pop() {
            if x == to {
                return true;
            }
            if std::mem::replace(&mut seen[x], true) {
                continue;
            }
            stack.extend(self.children(x));
        }
        false
    }

    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<()> {
        let n = self.n_nodes();
        if u >= n || v >= n || u == v {
            return Err(BnError::InvalidArgument(format!("bad edge {u} -> {v}")));
        }
        if self.has_edge(u, v) {
            return Ok(());
        }
        if self.has_path(v, u) {
            return Err(BnError::Cycle);
        }
        let ps = &mut self.parents[v];
        let at = ps.binary_search(&u).unwrap_err();
        ps.insert(at, u);
        Ok(())
    }

    pub fn remove_edge(&mut self, u: usize, v: usize) -> bool {
        match self.parents[v].binary_search(&u) {
            Ok(i) => {
                self.parents[v].remove(i);
                true
            }
            Err(_) => false,
        }
    }

    pub fn apply(&mut self, mv: Move) -> Result<()> {
        match mv {
            Move::Add(u, v) => self.add_edge(u, v),
            Move::Delete(u, v) => {
                if self.remove_edge(u, v) {
                    Ok(())
                } else {
                    Err(BnError::InvalidArgument(format!("no edge {u} -> {v}")))
                }
            }
            Move::Reverse(u, v) => {
                if !self.remove_edge(u, v) {
                    return Err(BnError::InvalidArgument(format!("no edge {u} -> {v}")));
                }
                self.add_edge(v, u).inspect_err(|_| {
                    self.add_edge(u, v).expect("restoring a removed edge");
                })
            }
        }
    }

    /// Kahn order; ties go to the lowest index.
    pub fn topological_order(&self) -> Vec<usize> {
        let n = self.n_nodes();
        let mut indeg: Vec<usize> = self.parents.iter().map(Vec::len).collect();
        let children: Vec<Vec<usize>> = (0..n).map(|u| self.children(u)).collect();
        let mut ready: BTreeSet<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(u) = ready.pop_first() {
            order.push(u);
            for &c in &children[u] {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    ready.insert(c);
                }
            }
        }
        order
    }

    pub fn is_acyclic(&self) -> bool {
        self.topological_order().len() == self.n_nodes()
    }

    /// `reach[u][v]`: a path `u ⇝ v` of length ≥ 1 exists.
    pub fn reachability(&self) -> Vec<Vec<bool>> {
        let n = self.n_nodes();
        let order = self.topological_order();
        let mut reach = vec![vec![false; n]; n];
        for &u in order.iter().rev() {
            for c in self.children(u) {
                reach[u][c] = true;
                let below = reach[c].clone();
                for (x, y) in reach[u].iter_mut().zip(below) {
                    *x |= y;
                }
            }
        }
        reach
    }

    /// Every legal addition, deletion and reversal, in a fixed order: by
    /// `(u, v)` pair, additions before deletions before reversals.
    pub fn neighbor_moves(&self) -> Vec<Move> {
        let n = self.n_nodes();
        let reach = self.reachability();
        let mut moves = Vec::new();
        for u in 0..n {
            for v in 0..n {
                if u == v {
                    continue;
                }
                if self.has_edge(u, v) {
                    moves.push(Move::Delete(u, v));
                    // Reversal is legal unless another path u ⇝ v survives the deletion.
                    if !self.children(u).into_iter().any(|c| c != v && reach[c][v]) {
                        moves.push(Move::Reverse(u, v));
                    }
                } else if !self.has_edge(v, u) && !reach[v][u] {
                    moves.push(Move::Add(u, v));
                }
            }
        }
        moves.sort_by_key(|m| match *m {
            Move::Add(u, v) => (0, u, v),
            Move::Delete(u, v) => (1, u, v),
            Move::Reverse(u, v) => (2, u, v),
        });
        moves
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("x{i}")).collect()
    }

    #[test]
    fn empty_pair_has_two_additions() {
        let m = Dag::empty(names(2)).neighbor_moves();
        assert_eq!(m, [Move::Add(0, 1), Move::Add(1, 0)]);
    }

    #[test]
    fn chain_rejects_closing_edge() {
        let d = Dag::from_edges(names(3), &[(0, 1), (1, 2)]).unwrap();
        let m = d.neighbor_moves();
        assert!(m.contains(&Move::Add(0, 2)));
        assert!(!m.contains(&Move::Add(2, 0)));
        assert!(Dag::from_edges(names(3), &[(0, 1), (1, 2), (2, 0)]).is_err());
    }

    #[test]
    fn reverse_round_trip() {
        let mut d = Dag::from_edges(names(3), &[(0, 1)]).unwrap();
        d.apply(Move::Reverse(0, 1)).unwrap();
        assert!(d.has_edge(1, 0) && !d.has_edge(0, 1));
        d.apply(Move::Reverse(0, 1).inverse()).unwrap();
        assert!(d.has_edge(0, 1));
    }

    #[test]
    fn topological_order_respects_edges() {
        let d = Dag::from_edges(names(4), &[(3, 1), (1, 0), (2, 0)]).unwrap();
        let order = d.topological_order();
        let pos = |x: usize| order.iter().position(|&y| y == x).unwrap();
        for (u, v) in d.edges() {
            assert!(pos(u) < pos(v));
        }
    }
}

//! DOT and JSON renderings of learned graphs and Markov blankets.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dag::Dag;
use crate::graph::markov_blanket;

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

pub fn to_dot(dag: &Dag) -> String {
    let mut out = String::from("digraph bn {\n");
    for name in dag.names() {
        out.push_str(&format!("  {};\n", quote(name)));
    }
    for (u, v) in dag.edges() {
        out.push_str(&format!("  {} -> {};\n", quote(&dag.names()[u]), quote(&dag.names()[v])));
    }
    out.push_str("}\n");
    out
}

/// Subgraph on the blanket of `target` plus the target itself, which is
/// drawn filled.
pub fn blanket_dot(dag: &Dag, target: usize) -> String {
    let mb = markov_blanket(dag, target);
    let keep = |x: usize| x == target || mb.contains(&x);
    let mut out = String::from("digraph markov_blanket {\n");
    out.push_str(&format!("  {} [style=filled, fillcolor=lightblue];\n", quote(&dag.names()[target])));
    for &x in &mb {
        out.push_str(&format!("  {};\n", quote(&dag.names()[x])));
    }
    for (u, v) in dag.edges() {
        if keep(u) && keep(v) {
            out.push_str(&format!("  {} -> {};\n", quote(&dag.names()[u]), quote(&dag.names()[v])));
        }
    }
    out.push_str("}\n");
    out
}

pub fn blanket_report(dag: &Dag, target: usize) -> String {
    let names = dag.names();
    let list = |xs: Vec<usize>| xs.iter().map(|&x| names[x].as_str()).collect::<Vec<_>>().join(", ");
    let parents = dag.parents(target).to_vec();
    let children = dag.children(target);
    let mut spouses: Vec<usize> = children.iter().flat_map(|&c| dag.parents(c).iter().copied()).filter(|&p| p != target).collect();
    spouses.sort_unstable();
    spouses.dedup();
    let mb = markov_blanket(dag, target);
    format!(
        "Markov blanket of {} ({} nodes): {}\n  parents: {}\n  children: {}\n  co-parents: {}\n",
        names[target],
        mb.len(),
        list(mb.iter().copied().collect()),
        list(parents),
        list(children),
        list(spouses)
    )
}

/// JSON adjacency list: node order plus each node's parents by name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdjacencyList {
    pub nodes: Vec<String>,
    pub parents: BTreeMap<String, Vec<String>>,
}

impl AdjacencyList {
    pub fn from_dag(dag: &Dag) -> Self {
        let names = dag.names();
        let parents = (0..dag.n_nodes()).map(|v| (names[v].clone(), dag.parents(v).iter().map(|&p| names[p].clone()).collect())).collect();
        Self { nodes: names.to_vec(), parents }
    }

    pub fn to_dag(&self) -> crate::error::Result<Dag> {
        let mut dag = Dag::empty(self.nodes.clone());
        for (child, ps) in &self.parents {
            let v = dag.index_of(child)?;
            for p in ps {
                let u = dag.index_of(p)?;
                dag.add_edge(u, v)?;
            }
        }
        Ok(dag)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_and_dot() {
        let d = Dag::from_edges(vec!["a".into(), "b\"q".into(), "c".into()], &[(0, 1), (2, 1)]).unwrap();
        let adj = AdjacencyList::from_dag(&d);
        let text = serde_json::to_string(&adj).unwrap();
        assert_eq!(serde_json::from_str::<AdjacencyList>(&text).unwrap().to_dag().unwrap(), d);
        let dot = to_dot(&d);
        assert!(dot.contains("\"a\" -> \"b\\\"q\";"));
        assert_eq!(blanket_dot(&d, 0).matches("->").count(), 2);
        assert!(blanket_report(&d, 0).starts_with("Markov blanket of a (2 nodes): b\"q, c"));
    }
}

//! Directed graph over named variables.
//!
//! Nodes are identified by name and indexed by declaration order. The graph
//! itself accepts any arc set without self-loops or duplicates so that
//! [`Dag::is_acyclic`] is a meaningful predicate; everything that consumes a
//! structure (fitting, sampling, the structure learner) requires acyclicity and
//! checks it.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dag {
    nodes: Vec<String>,
    index: HashMap<String, usize>,
    /// Parents of each node, sorted by declaration index.
    parents: Vec<Vec<usize>>,
}

/// Plain serializable view of a [`Dag`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DagSpec {
    pub nodes: Vec<String>,
    pub arcs: Vec<(String, String)>,
}

impl Dag {
    /// Creates a graph without arcs. Node names must be unique.
    pub fn empty<S: AsRef<str>>(nodes: &[S]) -> Result<Self> {
        let mut index = HashMap::with_capacity(nodes.len());
        let mut names = Vec::with_capacity(nodes.len());
        for (i, n) in nodes.iter().enumerate() {
            let n = n.as_ref().to_string();
            if index.insert(n.clone(), i).is_some() {
                return Err(Error::Structure(format!("duplicate node `{n}`")));
            }
            names.push(n);
        }
        Ok(Dag {
            parents: vec![Vec::new(); names.len()],
            nodes: names,
            index,
        })
    }

    /// Creates a graph from named arcs. Cycles are accepted here; use
    /// [`Dag::is_acyclic`] or [`Dag::topological_order`] to reject them.
    pub fn new<S: AsRef<str>, T: AsRef<str>>(nodes: &[S], arcs: &[(T, T)]) -> Result<Self> {
        let mut dag = Self::empty(nodes)?;
        for (u, v) in arcs {
            let u = dag.index_of(u.as_ref())?;
            let v = dag.index_of(v.as_ref())?;
            dag.insert_arc(u, v)?;
        }
        Ok(dag)
    }

    /// Like [`Dag::new`] but rejects cyclic arc sets.
    pub fn acyclic<S: AsRef<str>, T: AsRef<str>>(nodes: &[S], arcs: &[(T, T)]) -> Result<Self> {
        let dag = Self::new(nodes, arcs)?;
        dag.topological_order()?;
        Ok(dag)
    }

    pub fn from_spec(spec: &DagSpec) -> Result<Self> {
        Self::acyclic(&spec.nodes, &spec.arcs)
    }

    pub fn to_spec(&self) -> DagSpec {
        DagSpec {
            nodes: self.nodes.clone(),
            arcs: self
                .arcs()
                .into_iter()
                .map(|(u, v)| (self.nodes[u].clone(), self.nodes[v].clone()))
                .collect(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn name(&self, i: usize) -> &str {
        &self.nodes[i]
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownNode(name.to_string()))
    }

    pub fn arc_count(&self) -> usize {
        self.parents.iter().map(Vec::len).sum()
    }

    /// All arcs as `(parent, child)` index pairs, sorted.
    pub fn arcs(&self) -> Vec<(usize, usize)> {
        let mut arcs: Vec<(usize, usize)> = self
            .parents
            .iter()
            .enumerate()
            .flat_map(|(v, ps)| ps.iter().map(move |&u| (u, v)))
            .collect();
        arcs.sort_unstable();
        arcs
    }

    pub fn has_arc(&self, u: usize, v: usize) -> bool {
        self.parents[v].binary_search(&u).is_ok()
    }

    /// Parent indices of `v`, in declaration order.
    pub fn parent_indices(&self, v: usize) -> &[usize] {
        &self.parents[v]
    }

    /// Parent names of `node`, in declaration order.
    pub fn parents(&self, node: &str) -> Result<Vec<&str>> {
        let v = self.index_of(node)?;
        Ok(self.parents[v].iter().map(|&u| self.nodes[u].as_str()).collect())
    }

    pub fn children_indices(&self, u: usize) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&v| self.has_arc(u, v)).collect()
    }

    pub fn max_in_degree(&self) -> usize {
        self.parents.iter().map(Vec::len).max().unwrap_or(0)
    }

    fn insert_arc(&mut self, u: usize, v: usize) -> Result<()> {
        if u == v {
            return Err(Error::Structure(format!("self-loop on `{}`", self.nodes[u])));
        }
        match self.parents[v].binary_search(&u) {
            Ok(_) => Err(Error::Structure(format!(
                "duplicate arc {} -> {}",
                self.nodes[u], self.nodes[v]
            ))),
            Err(pos) => {
                self.parents[v].insert(pos, u);
                Ok(())
            }
        }
    }

    /// Adds `u -> v` if it keeps the graph acyclic.
    pub fn add_arc(&mut self, u: usize, v: usize) -> Result<()> {
        if !self.can_add_arc(u, v) {
            return Err(Error::Structure(format!(
                "arc {} -> {} is not addable",
                self.nodes[u], self.nodes[v]
            )));
        }
        self.insert_arc(u, v)
    }

    pub fn remove_arc(&mut self, u: usize, v: usize) -> Result<()> {
        match self.parents[v].binary_search(&u) {
            Ok(pos) => {
                self.parents[v].remove(pos);
                Ok(())
            }
            Err(_) => Err(Error::Structure(format!(
                "no arc {} -> {}",
                self.nodes[u], self.nodes[v]
            ))),
        }
    }

    /// Replaces `u -> v` by `v -> u` if the result is acyclic.
    pub fn flip_arc(&mut self, u: usize, v: usize) -> Result<()> {
        if !self.can_flip_arc(u, v) {
            return Err(Error::Structure(format!(
                "arc {} -> {} is not flippable",
                self.nodes[u], self.nodes[v]
            )));
        }
        self.remove_arc(u, v)?;
        self.insert_arc(v, u)
    }

    /// True if there is a directed path `from ~> to` (of length >= 0),
    /// optionally ignoring the single arc `skip`.
    fn reaches(&self, from: usize, to: usize, skip: Option<(usize, usize)>) -> bool {
        // Walk backwards from `to` through parents.
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![to];
        seen[to] = true;
        while let Some(x) = stack.pop() {
            if x == from {
                return true;
            }
            for &p in &self.parents[x] {
                if skip == Some((p, x)) || seen[p] {
                    continue;
                }
                seen[p] = true;
                stack.push(p);
            }
        }
        false
    }

    pub fn can_add_arc(&self, u: usize, v: usize) -> bool {
        u != v && !self.has_arc(u, v) && !self.reaches(v, u, None)
    }

    pub fn can_flip_arc(&self, u: usize, v: usize) -> bool {
        self.has_arc(u, v) && !self.reaches(u, v, Some((u, v)))
    }

    pub fn is_acyclic(&self) -> bool {
        self.topological_order_indices().is_ok()
    }

    /// Kahn's algorithm; among available nodes the earliest declared goes first.
    pub fn topological_order_indices(&self) -> Result<Vec<usize>> {
        let n = self.nodes.len();
        let mut indegree: Vec<usize> = self.parents.iter().map(Vec::len).collect();
        let children: Vec<Vec<usize>> = (0..n).map(|u| self.children_indices(u)).collect();
        let mut ready: BinaryHeap<Reverse<usize>> =
            (0..n).filter(|&v| indegree[v] == 0).map(Reverse).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(Reverse(u)) = ready.pop() {
            order.push(u);
            for &c in &children[u] {
                indegree[c] -= 1;
                if indegree[c] == 0 {
                    ready.push(Reverse(c));
                }
            }
        }
        if order.len() != n {
            let stuck: Vec<&str> = (0..n)
                .filter(|&v| indegree[v] > 0)
                .map(|v| self.nodes[v].as_str())
                .collect();
            return Err(Error::Structure(format!("cycle among {stuck:?}")));
        }
        Ok(order)
    }

    pub fn topological_order(&self) -> Result<Vec<&str>> {
        Ok(self
            .topological_order_indices()?
            .into_iter()
            .map(|i| self.nodes[i].as_str())
            .collect())
    }

    /// Undirected skeleton as sorted `(min, max)` index pairs.
    pub fn skeleton(&self) -> Vec<(usize, usize)> {
        let mut edges: Vec<(usize, usize)> = self
            .arcs()
            .into_iter()
            .map(|(u, v)| (u.min(v), u.max(v)))
            .collect();
        edges.sort_unstable();
        edges.dedup();
        edges
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dag(nodes: &[&str], arcs: &[(&str, &str)]) -> Dag {
        Dag::new(nodes, arcs).unwrap()
    }

    #[test]
    fn acyclicity() {
        assert!(dag(&["A", "B"], &[]).is_acyclic());
        assert!(dag(&["A", "B", "C"], &[("A", "B"), ("B", "C")]).is_acyclic());
        assert!(!dag(&["A", "B", "C"], &[("A", "B"), ("B", "C"), ("C", "A")]).is_acyclic());
    }

    #[test]
    fn topological_tie_break() {
        let g = dag(&["A", "B", "C"], &[("A", "B"), ("A", "C")]);
        assert_eq!(g.topological_order().unwrap(), vec!["A", "B", "C"]);
        let g = dag(&["A", "B"], &[("B", "A")]);
        assert_eq!(g.topological_order().unwrap(), vec!["B", "A"]);
        let g = dag(&["A", "B", "C"], &[("A", "B"), ("B", "C"), ("C", "A")]);
        assert!(matches!(g.topological_order(), Err(Error::Structure(_))));
        assert!(Dag::acyclic(&["A", "B"], &[("A", "B"), ("B", "A")]).is_err());
    }

    #[test]
    fn parent_lists() {
        let g = dag(&["A", "B", "C"], &[("B", "C"), ("A", "C")]);
        assert_eq!(g.parents("C").unwrap(), vec!["A", "B"]);
        assert!(g.parents("A").unwrap().is_empty());
        let g = dag(&["D", "E"], &[("D", "E")]);
        assert_eq!(g.parents("E").unwrap(), vec!["D"]);
        assert!(matches!(g.parents("Z"), Err(Error::UnknownNode(_))));
    }

    #[test]
    fn rejects_bad_arcs() {
        assert!(Dag::new(&["A"], &[("A", "A")]).is_err());
        assert!(Dag::new(&["A", "B"], &[("A", "B"), ("A", "B")]).is_err());
        assert!(Dag::new(&["A", "B"], &[("A", "X")]).is_err());
        assert!(Dag::empty(&["A", "A"]).is_err());
    }

    #[test]
    fn mutation_guards() {
        let mut g = dag(&["A", "B", "C"], &[("A", "B"), ("B", "C")]);
        assert!(!g.can_add_arc(2, 0));
        assert!(g.can_add_arc(0, 2));
        // flipping A->B is fine, but with A->C present flipping would need B ~> A check
        g.add_arc(0, 2).unwrap();
        assert!(!g.can_flip_arc(0, 2)); // A->B->C is another path
        assert!(g.can_flip_arc(1, 2));
        g.flip_arc(1, 2).unwrap();
        assert!(g.has_arc(2, 1) && !g.has_arc(1, 2));
        assert!(g.is_acyclic());
        g.remove_arc(0, 1).unwrap();
        assert!(g.remove_arc(0, 1).is_err());
    }

    #[test]
    fn spec_round_trip() {
        let g = dag(&["A", "B", "C"], &[("A", "B"), ("A", "C")]);
        assert_eq!(Dag::from_spec(&g.to_spec()).unwrap(), g);
    }
}

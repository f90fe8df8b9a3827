//! Directed causal graphs with per-edge effect scores, and the
//! post-processing that turns candidate edges into a final graph.

mod aggregate;
mod export;
mod orient;
mod prune;

pub use aggregate::aggregate_runs;
pub use export::{export_dot, export_json, import_json, to_dot, GraphJson};
pub use orient::orient_bidirectional;
pub use prune::{prune_indirect, PruneReport, DEFAULT_PATH_CAP};

use std::collections::BTreeMap;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeInfo {
    /// Effect score; for discovered edges the ΔMSE t-statistic.
    pub score: f64,
    /// Fraction of runs the edge appeared in, after aggregation.
    pub freq: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CausalGraph {
    nodes: Vec<String>,
    edges: BTreeMap<(usize, usize), EdgeInfo>,
}

impl CausalGraph {
    pub fn new(nodes: Vec<String>) -> Self {
        Self {
            nodes,
            edges: BTreeMap::new(),
        }
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn node_index(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n == name)
    }

    pub fn add_edge(&mut self, from: usize, to: usize, score: f64) -> Result<()> {
        self.insert(from, to, EdgeInfo { score, freq: None })
    }

    pub fn insert(&mut self, from: usize, to: usize, info: EdgeInfo) -> Result<()> {
        if from == to {
            return Err(Error::Graph(format!("self-loop on `{}`", self.nodes[from])));
        }
        if from >= self.nodes.len() || to >= self.nodes.len() {
            return Err(Error::Graph("edge endpoint out of range".into()));
        }
        self.edges.insert((from, to), info);
        Ok(())
    }

    pub fn add_named_edge(&mut self, from: &str, to: &str, score: f64) -> Result<()> {
        let u = self
            .node_index(from)
            .ok_or_else(|| Error::UnknownVariable(from.into()))?;
        let v = self.node_index(to).ok_or_else(|| Error::UnknownVariable(to.into()))?;
        self.add_edge(u, v, score)
    }

    pub fn remove_edge(&mut self, from: usize, to: usize) -> Option<EdgeInfo> {
        self.edges.remove(&(from, to))
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.edges.contains_key(&(from, to))
    }

    pub fn edge(&self, from: usize, to: usize) -> Option<&EdgeInfo> {
        self.edges.get(&(from, to))
    }

    pub fn score(&self, from: usize, to: usize) -> Option<f64> {
        self.edges.get(&(from, to)).map(|e| e.score)
    }

    /// Edges in `(from, to)` index order.
    pub fn edges(&self) -> impl Iterator<Item = ((usize, usize), &EdgeInfo)> {
        self.edges.iter().map(|(k, v)| (*k, v))
    }

    pub fn edge_keys(&self) -> Vec<(usize, usize)> {
        self.edges.keys().copied().collect()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn named_edges(&self) -> Vec<(String, String)> {
        self.edges
            .keys()
            .map(|&(u, v)| (self.nodes[u].clone(), self.nodes[v].clone()))
            .collect()
    }

    /// Out-neighbours of every node, in index order.
    pub(crate) fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for &(u, v) in self.edges.keys() {
            adj[u].push(v);
        }
        adj
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_self_loops() {
        let mut g = CausalGraph::new(vec!["a".into(), "b".into()]);
        assert!(g.add_edge(0, 0, 1.0).is_err());
        g.add_edge(0, 1, 1.0).unwrap();
        assert_eq!(g.named_edges(), vec![("a".to_string(), "b".to_string())]);
    }
}

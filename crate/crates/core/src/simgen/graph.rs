use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A known causal DAG over named variables, optionally with fixed edge weights.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthGraph {
    nodes: Vec<String>,
    edges: Vec<(usize, usize)>,
    weights: Option<Vec<f64>>,
}

/// On-disk form: `{"nodes": [...], "edges": [["u","v"], ...], "weights": [...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpecFile {
    pub nodes: Vec<String>,
    pub edges: Vec<(String, String)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

impl GroundTruthGraph {
    /// Validates node uniqueness, edge endpoints, self-loops, duplicates and acyclicity.
    pub fn new(nodes: Vec<String>, edges: Vec<(usize, usize)>) -> Result<Self> {
        let mut seen = HashMap::new();
        for (i, n) in nodes.iter().enumerate() {
            if seen.insert(n.as_str(), i).is_some() {
                return Err(Error::Graph(format!("duplicate node `{n}`")));
            }
        }
        let mut uniq = std::collections::HashSet::new();
        for &(u, v) in &edges {
            if u >= nodes.len() || v >= nodes.len() {
                return Err(Error::Graph("edge endpoint out of range".into()));
            }
            if u == v {
                return Err(Error::Graph(format!("self-loop on `{}`", nodes[u])));
            }
            if !uniq.insert((u, v)) {
                return Err(Error::Graph(format!("duplicate edge {} -> {}", nodes[u], nodes[v])));
            }
        }
        let g = Self {
            nodes,
            edges,
            weights: None,
        };
        g.topological_order()?;
        Ok(g)
    }

    pub fn from_names(nodes: &[&str], edges: &[(&str, &str)]) -> Result<Self> {
        let nodes: Vec<String> = nodes.iter().map(|s| s.to_string()).collect();
        let idx = |n: &str| {
            nodes
                .iter()
                .position(|m| m == n)
                .ok_or_else(|| Error::Graph(format!("edge references unknown node `{n}`")))
        };
        let edges = edges
            .iter()
            .map(|(u, v)| Ok((idx(u)?, idx(v)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(nodes, edges)
    }

    /// Attaches fixed weights, one per edge in edge order.
    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.edges.len() {
            return Err(Error::Graph(format!(
                "{} weights for {} edges",
                weights.len(),
                self.edges.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::Graph("non-finite edge weight".into()));
        }
        self.weights = Some(weights);
        Ok(self)
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Edges as `(from, to)` name pairs.
    pub fn named_edges(&self) -> Vec<(String, String)> {
        self.edges
            .iter()
            .map(|&(u, v)| (self.nodes[u].clone(), self.nodes[v].clone()))
            .collect()
    }

    /// Parents of `v` with the index of the connecting edge.
    pub fn parents(&self, v: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges
            .iter()
            .enumerate()
            .filter(move |(_, &(_, c))| c == v)
            .map(|(e, &(p, _))| (p, e))
    }

    /// Kahn's algorithm, lowest index first among ready nodes.
    pub fn topological_order(&self) -> Result<Vec<usize>> {
        let n = self.nodes.len();
        let mut indeg = vec![0usize; n];
        for &(_, v) in &self.edges {
            indeg[v] += 1;
        }
        let mut ready: std::collections::BTreeSet<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(u) = ready.pop_first() {
            order.push(u);
            for &(a, b) in &self.edges {
                if a == u {
                    indeg[b] -= 1;
                    if indeg[b] == 0 {
                        ready.insert(b);
                    }
                }
            }
        }
        if order.len() != n {
            return Err(Error::Graph("graph contains a directed cycle".into()));
        }
        Ok(order)
    }

    pub fn to_spec(&self) -> GraphSpecFile {
        GraphSpecFile {
            nodes: self.nodes.clone(),
            edges: self.named_edges(),
            weights: self.weights.clone(),
        }
    }

    pub fn from_spec(spec: GraphSpecFile) -> Result<Self> {
        let names: Vec<&str> = spec.nodes.iter().map(String::as_str).collect();
        let edges: Vec<(&str, &str)> = spec.edges.iter().map(|(u, v)| (u.as_str(), v.as_str())).collect();
        let g = Self::from_names(&names, &edges)?;
        match spec.weights {
            Some(w) => g.with_weights(w),
            None => Ok(g),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_spec(serde_json::from_str(&text)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut text = serde_json::to_string_pretty(&self.to_spec())?;
        text.push('\n');
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    /// Builtin name, or else a path to a graph spec file.
    pub fn resolve(name_or_path: &str) -> Result<Self> {
        match builtin_graph(name_or_path) {
            Ok(g) => Ok(g),
            Err(_) if Path::new(name_or_path).exists() => Self::load(name_or_path),
            Err(e) => Err(e),
        }
    }
}

pub const BUILTIN_GRAPHS: [&str; 3] = ["chain3", "basic7", "rtk39"];

/// `chain3`: x -> y -> z.
/// `basic7`: a 7-node DAG with a chain (a -> b -> c), a fork (a -> b, a -> d)
/// and a collider (d -> e <- f), plus g -> f.
/// `rtk39`: a 39-node signaling-pathway-like DAG in which clusters of
/// parents feed shared children.
pub fn builtin_graph(name: &str) -> Result<GroundTruthGraph> {
    match name {
        "chain3" => GroundTruthGraph::from_names(&["x", "y", "z"], &[("x", "y"), ("y", "z")]),
        "basic7" => GroundTruthGraph::from_names(
            &["a", "b", "c", "d", "e", "f", "g"],
            &[("a", "b"), ("b", "c"), ("a", "d"), ("d", "e"), ("f", "e"), ("g", "f")],
        ),
        "rtk39" | "rtk39-style" => rtk39(),
        other => Err(Error::Config(format!(
            "unknown builtin graph `{other}` (expected one of {BUILTIN_GRAPHS:?})"
        ))),
    }
}

fn rtk39() -> Result<GroundTruthGraph> {
    let nodes: Vec<String> = (0..39).map(|i| format!("n{i:02}")).collect();
    let mut edges = Vec::new();
    let mut cluster_to = |from: std::ops::RangeInclusive<usize>, to: usize| {
        for u in from {
            edges.push((u, to));
        }
    };
    // (cluster of parents, shared child)
    cluster_to(0..=4, 5);
    cluster_to(8..=11, 7);
    cluster_to(12..=15, 16);
    cluster_to(18..=21, 22);
    cluster_to(25..=28, 29);
    cluster_to(30..=33, 34);
    let mut fan_out = |from: usize, to: std::ops::RangeInclusive<usize>| {
        for v in to {
            edges.push((from, v));
        }
    };
    fan_out(5, 6..=7);
    fan_out(7, 12..=15);
    fan_out(17, 18..=21);
    fan_out(24, 25..=28);
    fan_out(36, 37..=38);
    for (u, v) in [(6, 17), (16, 17), (22, 23), (23, 24), (29, 35), (34, 35), (35, 36)] {
        edges.push((u, v));
    }
    GroundTruthGraph::new(nodes, edges)
}

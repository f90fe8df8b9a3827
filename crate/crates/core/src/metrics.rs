//! Directed-edge precision, recall and F1 against a known graph.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::CausalGraph;
use crate::simgen::GroundTruthGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// Predicted with the true direction.
    Correct,
    /// Predicted, but the truth has the opposite direction only.
    Reversed,
    /// Predicted between a pair with no true edge.
    Spurious,
    /// True edge not predicted.
    Missed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeVerdict {
    pub from: String,
    pub to: String,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Score {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub n_predicted: usize,
    pub n_truth: usize,
    pub n_correct: usize,
    /// Every predicted edge and every missed true edge, sorted by name.
    pub ledger: Vec<EdgeVerdict>,
}

/// Scores `predicted` against `truth` by directed edges. Each direction of a
/// bidirectional prediction is judged on its own. An empty prediction has
/// precision 0, except against an empty truth, which scores 1 throughout.
pub fn score(predicted: &CausalGraph, truth: &GroundTruthGraph) -> Result<Score> {
    let p_nodes: BTreeSet<&str> = predicted.nodes().iter().map(String::as_str).collect();
    let t_nodes: BTreeSet<&str> = truth.nodes().iter().map(String::as_str).collect();
    if p_nodes != t_nodes || p_nodes.len() != predicted.n_nodes() || t_nodes.len() != truth.nodes().len() {
        return Err(Error::Graph(
            "predicted and true graphs have different node sets".into(),
        ));
    }
    let true_edges: BTreeSet<(&str, &str)> = truth
        .edges()
        .iter()
        .map(|&(u, v)| (truth.nodes()[u].as_str(), truth.nodes()[v].as_str()))
        .collect();
    let pred_edges: BTreeSet<(&str, &str)> = predicted
        .edges()
        .map(|((u, v), _)| (predicted.nodes()[u].as_str(), predicted.nodes()[v].as_str()))
        .collect();

    let mut ledger = Vec::new();
    let mut correct = 0;
    for &(u, v) in &pred_edges {
        let verdict = if true_edges.contains(&(u, v)) {
            correct += 1;
            Verdict::Correct
        } else if true_edges.contains(&(v, u)) {
            Verdict::Reversed
        } else {
            Verdict::Spurious
        };
        ledger.push(EdgeVerdict {
            from: u.into(),
            to: v.into(),
            verdict,
        });
    }
    for &(u, v) in true_edges.difference(&pred_edges) {
        ledger.push(EdgeVerdict {
            from: u.into(),
            to: v.into(),
            verdict: Verdict::Missed,
        });
    }
    ledger.sort_by(|a, b| (&a.from, &a.to).cmp(&(&b.from, &b.to)));

    let both_empty = pred_edges.is_empty() && true_edges.is_empty();
    let ratio = |a: usize, b: usize| match b {
        0 if both_empty => 1.0,
        0 => 0.0,
        _ => a as f64 / b as f64,
    };
    let precision = ratio(correct, pred_edges.len());
    let recall = ratio(correct, true_edges.len());
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(Score {
        precision,
        recall,
        f1,
        n_predicted: pred_edges.len(),
        n_truth: true_edges.len(),
        n_correct: correct,
        ledger,
    })
}

/// One summary line per scored run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub dataset: String,
    pub method: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub runtime_seconds: f64,
}

impl ResultRow {
    pub fn new(dataset: impl Into<String>, method: impl Into<String>, s: &Score, runtime_seconds: f64) -> Self {
        Self {
            dataset: dataset.into(),
            method: method.into(),
            precision: s.precision,
            recall: s.recall,
            f1: s.f1,
            runtime_seconds,
        }
    }
}

/// Writes rows of any serializable record type with a header line.
pub fn write_rows<T: Serialize>(w: impl Write, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(w);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::Data(format!("csv flush failed: {e}")))?;
    Ok(())
}

pub fn save_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_rows(std::io::BufWriter::new(f), rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn truth(edges: &[(&str, &str)]) -> GroundTruthGraph {
        GroundTruthGraph::from_names(&["a", "b", "c"], edges).unwrap()
    }

    fn pred(edges: &[(&str, &str)]) -> CausalGraph {
        let mut g = CausalGraph::new(vec!["a".into(), "b".into(), "c".into()]);
        for (u, v) in edges {
            g.add_named_edge(u, v, 1.0).unwrap();
        }
        g
    }

    #[test]
    fn ledger_labels_each_edge() {
        let s = score(
            &pred(&[("a", "b"), ("c", "b"), ("a", "c")]),
            &truth(&[("a", "b"), ("b", "c")]),
        )
        .unwrap();
        let kinds: Vec<(&str, &str, Verdict)> = s
            .ledger
            .iter()
            .map(|e| (e.from.as_str(), e.to.as_str(), e.verdict))
            .collect();
        assert_eq!(
            kinds,
            vec![
                ("a", "b", Verdict::Correct),
                ("a", "c", Verdict::Spurious),
                ("b", "c", Verdict::Missed),
                ("c", "b", Verdict::Reversed),
            ]
        );
    }

    #[test]
    fn node_order_does_not_matter_but_node_set_does() {
        let mut g = CausalGraph::new(vec!["c".into(), "a".into(), "b".into()]);
        g.add_named_edge("a", "b", 1.0).unwrap();
        assert_eq!(score(&g, &truth(&[("a", "b")])).unwrap().f1, 1.0);
        let other = CausalGraph::new(vec!["a".into(), "b".into()]);
        assert!(score(&other, &truth(&[])).is_err());
    }
}

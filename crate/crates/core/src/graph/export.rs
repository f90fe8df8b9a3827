use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{CausalGraph, EdgeInfo};
use crate::error::{Error, Result};

/// `{"nodes": [...], "edges": [{"from", "to", "t", "freq"}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphJson {
    pub nodes: Vec<String>,
    pub edges: Vec<EdgeJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeJson {
    pub from: String,
    pub to: String,
    #[serde(serialize_with = "ser_score", deserialize_with = "de_score")]
    pub t: f64,
    pub freq: Option<f64>,
}

// JSON has no infinities; degenerate t-statistics are written as strings.
fn ser_score<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else if x.is_nan() {
        s.serialize_str("nan")
    } else if *x > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

fn de_score<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Score {
        Num(f64),
        Text(String),
    }
    match Score::deserialize(d)? {
        Score::Num(x) => Ok(x),
        Score::Text(t) => match t.as_str() {
            "inf" => Ok(f64::INFINITY),
            "-inf" => Ok(f64::NEG_INFINITY),
            "nan" => Ok(f64::NAN),
            other => Err(serde::de::Error::custom(format!("bad score `{other}`"))),
        },
    }
}

impl From<&CausalGraph> for GraphJson {
    fn from(g: &CausalGraph) -> Self {
        GraphJson {
            nodes: g.nodes().to_vec(),
            edges: g
                .edges()
                .map(|((u, v), e)| EdgeJson {
                    from: g.nodes()[u].clone(),
                    to: g.nodes()[v].clone(),
                    t: e.score,
                    freq: e.freq,
                })
                .collect(),
        }
    }
}

impl TryFrom<GraphJson> for CausalGraph {
    type Error = Error;

    fn try_from(j: GraphJson) -> Result<Self> {
        let mut g = CausalGraph::new(j.nodes);
        for e in j.edges {
            let u = g
                .node_index(&e.from)
                .ok_or_else(|| Error::UnknownVariable(e.from.clone()))?;
            let v = g
                .node_index(&e.to)
                .ok_or_else(|| Error::UnknownVariable(e.to.clone()))?;
            g.insert(
                u,
                v,
                EdgeInfo {
                    score: e.t,
                    freq: e.freq,
                },
            )?;
        }
        Ok(g)
    }
}

pub fn export_json(g: &CausalGraph, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut text = serde_json::to_string_pretty(&GraphJson::from(g))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn import_json(path: impl AsRef<Path>) -> Result<CausalGraph> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let j: GraphJson = serde_json::from_str(&text)?;
    CausalGraph::try_from(j)
}

fn quote(id: &str) -> String {
    format!("\"{}\"", id.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Graphviz digraph; edge labels carry the frequency when present, else the score.
pub fn to_dot(g: &CausalGraph) -> String {
    let mut out = String::from("digraph causal {\n");
    for n in g.nodes() {
        let _ = writeln!(out, "  {};", quote(n));
    }
    for ((u, v), e) in g.edges() {
        let label = match e.freq {
            Some(f) => format!("{f:.2}"),
            None => format!("{:.3}", e.score),
        };
        let _ = writeln!(
            out,
            "  {} -> {} [label={}];",
            quote(&g.nodes()[u]),
            quote(&g.nodes()[v]),
            quote(&label)
        );
    }
    out.push_str("}\n");
    out
}

pub fn export_dot(g: &CausalGraph, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, to_dot(g)).map_err(|e| Error::io(path, e))
}

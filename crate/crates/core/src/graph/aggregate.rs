use std::collections::BTreeMap;

use super::{CausalGraph, EdgeInfo};
use crate::error::{Error, Result};

/// Keeps edges found in more than `keep_threshold` of the runs. Kept edges
/// record their frequency and the mean score over the runs that had them.
pub fn aggregate_runs(graphs: &[CausalGraph], keep_threshold: f64) -> Result<CausalGraph> {
    let first = graphs
        .first()
        .ok_or_else(|| Error::Graph("no graphs to aggregate".into()))?;
    if graphs.iter().any(|g| g.nodes() != first.nodes()) {
        return Err(Error::Graph("graphs have mismatched node sets".into()));
    }
    let mut tally: BTreeMap<(usize, usize), (usize, f64)> = BTreeMap::new();
    for g in graphs {
        for (k, e) in g.edges() {
            let t = tally.entry(k).or_insert((0, 0.0));
            t.0 += 1;
            t.1 += e.score;
        }
    }
    let n = graphs.len() as f64;
    let mut out = CausalGraph::new(first.nodes().to_vec());
    for ((u, v), (count, total)) in tally {
        let freq = count as f64 / n;
        if freq > keep_threshold {
            out.insert(
                u,
                v,
                EdgeInfo {
                    score: total / count as f64,
                    freq: Some(freq),
                },
            )?;
        }
    }
    Ok(out)
}

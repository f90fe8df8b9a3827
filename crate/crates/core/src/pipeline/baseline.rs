use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use serde::Serialize;

use super::discover::{create_dir, data_digest, write_json, GRAPH_DOT, GRAPH_JSON, RUN_JSON};
use crate::data::LongitudinalDataset;
use crate::error::{Error, Result};
use crate::graph::{export_dot, export_json};
use crate::linear::{linear_gc, Interpolated, LinearGcConfig, LinearGcResult};
use crate::util::json_digest;

#[derive(Debug, Clone)]
pub struct Baseline {
    pub result: LinearGcResult,
    pub flagged: Vec<(String, String)>,
    pub config: LinearGcConfig,
    pub data_digest: String,
}

pub fn baseline(data: &LongitudinalDataset, cfg: &LinearGcConfig) -> Result<Baseline> {
    let (result, Interpolated { flagged, .. }) = linear_gc(data, cfg)?;
    Ok(Baseline {
        result,
        flagged,
        config: cfg.clone(),
        data_digest: data_digest(data)?,
    })
}

#[derive(Serialize)]
struct BaselineRecord<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    config_digest: String,
    data_digest: &'a str,
    config: &'a LinearGcConfig,
    /// `(individual, variable)` pairs with no observations, filled with zero.
    empty_series: &'a [(String, String)],
}

pub const F_TESTS_CSV: &str = "f_tests.csv";

/// Writes the graph (DOT and JSON), per-pair F-tests and a metadata record.
pub fn write_baseline(dir: &Path, b: &Baseline) -> Result<()> {
    create_dir(dir)?;
    export_dot(&b.result.graph, dir.join(GRAPH_DOT))?;
    export_json(&b.result.graph, dir.join(GRAPH_JSON))?;
    let path = dir.join(F_TESTS_CSV);
    let f = File::create(&path).map_err(|e| Error::io(&path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(f));
    w.write_record(["cause", "effect", "f", "p", "df1", "df2"])?;
    let names = b.result.graph.nodes();
    for t in &b.result.tests {
        w.write_record([
            names[t.cause].clone(),
            names[t.effect].clone(),
            format!("{}", t.f),
            format!("{}", t.p),
            t.df1.to_string(),
            t.df2.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    let record = BaselineRecord {
        tool: "longcause",
        version: env!("CARGO_PKG_VERSION"),
        command: "baseline",
        config_digest: json_digest(&b.config),
        data_digest: &b.data_digest,
        config: &b.config,
        empty_series: &b.flagged,
    };
    write_json(&dir.join(RUN_JSON), &record)
}

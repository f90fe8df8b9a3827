use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::{write_csv, LongitudinalDataset};
use crate::error::{Error, Result};
use crate::forecaster::TrainHistory;
use crate::gc::{detect_edges, DeltaMseTable, GcConfig};
use crate::graph::{
    aggregate_runs, export_dot, export_json, orient_bidirectional, prune_indirect, CausalGraph, DEFAULT_PATH_CAP,
};
use crate::util::{derive_seed, json_digest};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiscoverConfig {
    pub gc: GcConfig,
    /// Resolve pairs detected in both directions.
    pub orient: bool,
    /// Remove edges explained by stronger alternative paths.
    pub prune: bool,
    pub path_cap: usize,
    /// Independent detection runs; more than one enables aggregation.
    pub runs: usize,
    /// Fraction of runs an edge must strictly exceed to be kept.
    pub keep_threshold: f64,
}

impl Default for DiscoverConfig {
    fn default() -> Self {
        Self {
            gc: GcConfig::default(),
            orient: true,
            prune: true,
            path_cap: DEFAULT_PATH_CAP,
            runs: 1,
            keep_threshold: 0.5,
        }
    }
}

impl DiscoverConfig {
    pub fn validate(&self) -> Result<()> {
        self.gc.validate()?;
        if self.runs == 0 {
            return Err(Error::Config("runs must be at least 1".into()));
        }
        if self.path_cap == 0 {
            return Err(Error::Config("path_cap must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.keep_threshold) {
            return Err(Error::Config("keep_threshold must lie in [0, 1)".into()));
        }
        Ok(())
    }

    /// Seed used for run `i`; a single run uses the configured seed as is.
    pub fn run_seed(&self, i: usize) -> u64 {
        if self.runs == 1 {
            self.gc.seed
        } else {
            derive_seed(self.gc.seed, "run", i as u64)
        }
    }
}

/// Orientation then pruning of a candidate graph, each step optional.
#[derive(Debug, Clone, PartialEq)]
pub struct PostProcessed {
    pub oriented: CausalGraph,
    pub graph: CausalGraph,
    pub pruned: Vec<(usize, usize)>,
    pub capped: Vec<(usize, usize)>,
}

pub fn post_process(candidate: &CausalGraph, orient: bool, prune: bool, path_cap: usize) -> PostProcessed {
    let oriented = if orient {
        orient_bidirectional(candidate)
    } else {
        candidate.clone()
    };
    if !prune {
        return PostProcessed {
            graph: oriented.clone(),
            oriented,
            pruned: Vec::new(),
            capped: Vec::new(),
        };
    }
    let report = prune_indirect(&oriented, path_cap);
    PostProcessed {
        oriented,
        graph: report.graph,
        pruned: report.removed,
        capped: report.capped,
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub seed: u64,
    pub table: DeltaMseTable,
    pub candidate: CausalGraph,
    pub post: PostProcessed,
    pub histories: Vec<TrainHistory>,
}

#[derive(Debug, Clone)]
pub struct Discovery {
    pub runs: Vec<RunOutcome>,
    /// Final graph: the single run's graph, or the aggregate over runs.
    pub graph: CausalGraph,
    pub config: DiscoverConfig,
    pub data_digest: String,
}

/// SHA-256 of the dataset's CSV serialization.
pub fn data_digest(data: &LongitudinalDataset) -> Result<String> {
    use sha2::{Digest, Sha256};
    let mut buf = Vec::new();
    write_csv(data, &mut buf)?;
    Ok(hex::encode(Sha256::digest(&buf)))
}

/// Detection, orientation and pruning, repeated `runs` times.
pub fn discover(data: &LongitudinalDataset, cfg: &DiscoverConfig) -> Result<Discovery> {
    cfg.validate()?;
    let mut runs = Vec::with_capacity(cfg.runs);
    for i in 0..cfg.runs {
        let gc = GcConfig {
            seed: cfg.run_seed(i),
            ..cfg.gc.clone()
        };
        let det = detect_edges(data, &gc)?;
        let post = post_process(&det.candidate, cfg.orient, cfg.prune, cfg.path_cap);
        runs.push(RunOutcome {
            seed: gc.seed,
            table: det.table,
            candidate: det.candidate,
            post,
            histories: det.histories,
        });
    }
    let graph = if runs.len() == 1 {
        runs[0].post.graph.clone()
    } else {
        let graphs: Vec<CausalGraph> = runs.iter().map(|r| r.post.graph.clone()).collect();
        aggregate_runs(&graphs, cfg.keep_threshold)?
    };
    Ok(Discovery {
        runs,
        graph,
        config: cfg.clone(),
        data_digest: data_digest(data)?,
    })
}

#[derive(Debug, Serialize)]
struct RunRecord<'a> {
    seed: u64,
    candidate_edges: Vec<(String, String)>,
    pruned_edges: Vec<(String, String)>,
    capped_edges: Vec<(String, String)>,
    untestable_pairs: Vec<(String, String)>,
    histories: &'a [TrainHistory],
}

#[derive(Debug, Serialize)]
struct DiscoverRecord<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    config_digest: String,
    data_digest: &'a str,
    config: &'a DiscoverConfig,
    runs: Vec<RunRecord<'a>>,
}

fn names(g: &CausalGraph, edges: &[(usize, usize)]) -> Vec<(String, String)> {
    edges
        .iter()
        .map(|&(u, v)| (g.nodes()[u].clone(), g.nodes()[v].clone()))
        .collect()
}

pub(crate) fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(f);
    serde_json::to_writer_pretty(&mut w, value)?;
    use std::io::Write;
    w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

/// Output file names inside a discovery directory.
pub const GRAPH_DOT: &str = "graph.dot";
pub const GRAPH_JSON: &str = "graph.json";
pub const CANDIDATE_JSON: &str = "candidate.json";
pub const RUN_JSON: &str = "run.json";

fn table_names(run: usize, runs: usize) -> (String, String) {
    if runs == 1 {
        ("delta_mse.csv".into(), "delta_mse_summary.csv".into())
    } else {
        (
            format!("delta_mse_run{run}.csv"),
            format!("delta_mse_summary_run{run}.csv"),
        )
    }
}

/// Writes the final graph (DOT and JSON), each run's ΔMSE tables and
/// candidate graph, and a metadata record. Nothing written depends on
/// wall-clock time, so identical inputs give identical bytes.
pub fn write_discovery(dir: &Path, d: &Discovery) -> Result<()> {
    create_dir(dir)?;
    export_dot(&d.graph, dir.join(GRAPH_DOT))?;
    export_json(&d.graph, dir.join(GRAPH_JSON))?;
    let n = d.runs.len();
    for (i, r) in d.runs.iter().enumerate() {
        let (samples, summary) = table_names(i, n);
        r.table.save(dir.join(samples), dir.join(summary))?;
        let cand = if n == 1 {
            CANDIDATE_JSON.to_string()
        } else {
            format!("candidate_run{i}.json")
        };
        export_json(&r.candidate, dir.join(cand))?;
    }
    let record = DiscoverRecord {
        tool: "longcause",
        version: env!("CARGO_PKG_VERSION"),
        command: "discover",
        config_digest: json_digest(&d.config),
        data_digest: &d.data_digest,
        config: &d.config,
        runs: d
            .runs
            .iter()
            .map(|r| RunRecord {
                seed: r.seed,
                candidate_edges: r.candidate.named_edges(),
                pruned_edges: names(&r.post.oriented, &r.post.pruned),
                capped_edges: names(&r.post.oriented, &r.post.capped),
                untestable_pairs: names(&r.candidate, &r.table.untestable()),
                histories: &r.histories,
            })
            .collect(),
    };
    write_json(&dir.join(RUN_JSON), &record)
}

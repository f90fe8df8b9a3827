use std::path::Path;
use std::time::Instant;

use log::{error, info};
use serde::{Deserialize, Serialize};

use super::baseline::{baseline, write_baseline};
use super::discover::{discover, write_discovery, DiscoverConfig};
use crate::data::save_csv;
use crate::error::{Error, Result};
use crate::graph::CausalGraph;
use crate::linear::LinearGcConfig;
use crate::metrics::{score, Score};
use crate::simgen::{generate_dataset, SamplePath, SimConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Recurrent forecaster with the ΔMSE test, orientation and pruning.
    RnnGc,
    /// Linear vector-autoregressive F-test.
    LinearGc,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::RnnGc => "rnn_gc",
            Method::LinearGc => "linear_gc",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Fields not swept by the grid (graph, sizes) come from here.
    pub base: SimConfig,
    pub sample_paths: Vec<SamplePath>,
    pub lags: Vec<usize>,
    pub noise_sigmas: Vec<f64>,
    pub missing_rates: Vec<f64>,
    pub seeds: Vec<u64>,
    pub methods: Vec<Method>,
    /// Keep each cell's dataset and method outputs under the output directory.
    pub save_artifacts: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            base: SimConfig::default(),
            sample_paths: vec![SamplePath::GaussianRandomWalk],
            lags: vec![1, 2],
            noise_sigmas: vec![0.1, 1.0],
            missing_rates: vec![0.0],
            seeds: (0..5).collect(),
            methods: vec![Method::RnnGc, Method::LinearGc],
            save_artifacts: false,
        }
    }
}

impl ExperimentConfig {
    /// Simulation settings of every grid cell, in output order.
    pub fn cells(&self) -> Vec<SimConfig> {
        let mut out = Vec::new();
        for &sample_path in &self.sample_paths {
            for &lag in &self.lags {
                for &noise_sigma in &self.noise_sigmas {
                    for &missing_rate in &self.missing_rates {
                        for &seed in &self.seeds {
                            out.push(SimConfig {
                                sample_path,
                                lag,
                                noise_sigma,
                                missing_rate,
                                seed,
                                ..self.base.clone()
                            });
                        }
                    }
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::Config("experiment lists no methods".into()));
        }
        for c in self.cells() {
            c.validate()?;
        }
        Ok(())
    }
}

/// Identifier of a grid cell, safe as a directory name.
pub fn dataset_id(c: &SimConfig) -> String {
    let path = match c.sample_path {
        SamplePath::GaussianRandomWalk => "rw",
        SamplePath::Sigmoid => "sigmoid",
    };
    let graph = Path::new(&c.graph)
        .file_stem()
        .map_or_else(|| c.graph.clone(), |s| s.to_string_lossy().into_owned());
    format!(
        "{graph}_{path}_lag{}_sigma{}_miss{}_seed{}",
        c.lag, c.noise_sigma, c.missing_rate, c.seed
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub dataset: String,
    pub method: String,
    pub graph: String,
    pub sample_path: SamplePath,
    pub lag: usize,
    pub noise_sigma: f64,
    pub missing_rate: f64,
    pub seed: u64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub runtime_seconds: f64,
    /// Empty unless the cell failed.
    pub error: String,
}

/// Runs one method on one simulated dataset and scores the final graph.
pub fn run_method(
    method: Method,
    data: &crate::data::LongitudinalDataset,
    discover_cfg: &DiscoverConfig,
    linear_cfg: &LinearGcConfig,
    artifacts: Option<&Path>,
) -> Result<CausalGraph> {
    match method {
        Method::RnnGc => {
            let d = discover(data, discover_cfg)?;
            if let Some(dir) = artifacts {
                write_discovery(dir, &d)?;
            }
            Ok(d.graph)
        }
        Method::LinearGc => {
            let b = baseline(data, linear_cfg)?;
            if let Some(dir) = artifacts {
                write_baseline(dir, &b)?;
            }
            Ok(b.result.graph)
        }
    }
}

/// Simulates every cell and runs every method on it. A failing cell is
/// logged and recorded with its error; the grid continues.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    discover_cfg: &DiscoverConfig,
    linear_cfg: &LinearGcConfig,
    out_dir: Option<&Path>,
) -> Result<Vec<ExperimentRow>> {
    cfg.validate()?;
    discover_cfg.validate()?;
    linear_cfg.validate()?;
    let mut rows = Vec::new();
    for cell in cfg.cells() {
        let id = dataset_id(&cell);
        let cell_dir = match (cfg.save_artifacts, out_dir) {
            (true, Some(d)) => Some(d.join("cells").join(&id)),
            _ => None,
        };
        let simulated = generate_dataset(&cell).and_then(|(data, truth)| {
            if let Some(dir) = &cell_dir {
                super::discover::create_dir(dir)?;
                save_csv(&data, dir.join("data.csv"))?;
                truth.save(dir.join("truth.json"))?;
            }
            Ok((data, truth))
        });
        for &method in &cfg.methods {
            let start = Instant::now();
            let outcome: Result<Score> = simulated.as_ref().map_err(clone_err).and_then(|(data, truth)| {
                let dcfg = DiscoverConfig {
                    gc: crate::gc::GcConfig {
                        seed: cell.seed,
                        ..discover_cfg.gc.clone()
                    },
                    ..discover_cfg.clone()
                };
                let dir = cell_dir.as_ref().map(|d| d.join(method.name()));
                let graph = run_method(method, data, &dcfg, linear_cfg, dir.as_deref())?;
                score(&graph, truth)
            });
            let runtime_seconds = start.elapsed().as_secs_f64();
            let (precision, recall, f1, err) = match outcome {
                Ok(s) => (s.precision, s.recall, s.f1, String::new()),
                Err(e) => {
                    error!("{id} / {}: {e}", method.name());
                    (f64::NAN, f64::NAN, f64::NAN, e.to_string())
                }
            };
            info!("{id} / {}: f1 {f1:.3} in {runtime_seconds:.1}s", method.name());
            rows.push(ExperimentRow {
                dataset: id.clone(),
                method: method.name().into(),
                graph: cell.graph.clone(),
                sample_path: cell.sample_path,
                lag: cell.lag,
                noise_sigma: cell.noise_sigma,
                missing_rate: cell.missing_rate,
                seed: cell.seed,
                precision,
                recall,
                f1,
                runtime_seconds,
                error: err,
            });
        }
    }
    Ok(rows)
}

fn clone_err(e: &Error) -> Error {
    Error::Data(format!("simulation failed: {e}"))
}

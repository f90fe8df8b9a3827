//! End-to-end runs: simulate, discover, baseline, evaluate and grid
//! experiments, with file outputs and reproducibility metadata.

mod baseline;
mod discover;
mod experiment;

pub use baseline::{baseline, write_baseline, Baseline, F_TESTS_CSV};
pub use discover::{
    data_digest, discover, post_process, write_discovery, DiscoverConfig, Discovery, PostProcessed, RunOutcome,
    CANDIDATE_JSON, GRAPH_DOT, GRAPH_JSON, RUN_JSON,
};
pub use experiment::{dataset_id, run_experiment, run_method, ExperimentConfig, ExperimentRow, Method};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linear::LinearGcConfig;
use crate::simgen::SimConfig;

/// Every setting of every command, one section each. Missing keys take
/// their defaults, so an empty file is a valid configuration.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub simulate: SimConfig,
    pub discover: DiscoverConfig,
    pub baseline: LinearGcConfig,
    pub experiment: ExperimentConfig,
}

impl Config {
    pub fn validate(&self) -> Result<()> {
        self.simulate.validate()?;
        self.discover.validate()?;
        self.baseline.validate()?;
        self.experiment.validate()
    }
}

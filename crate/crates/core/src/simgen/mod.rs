//! Synthetic longitudinal datasets driven by a known causal DAG.

mod generate;
mod graph;

pub use generate::{
    generate_dataset, generate_dataset_with_graph, generate_individual, inject_missingness, sample_weights,
    LatentIndividual, SamplePath, SigmoidParams, SimConfig, LATENT_STEPS,
};
pub use graph::{builtin_graph, GraphSpecFile, GroundTruthGraph, BUILTIN_GRAPHS};

//! Causal graph discovery for sparse, multi-individual longitudinal data.
//!
//! A single recurrent forecaster, trained with whole-variable input dropout,
//! scores every ordered variable pair by how much withholding the candidate
//! cause degrades held-out next-step prediction of the effect. A one-sample
//! t-test across repeated cross-validation splits selects candidate edges,
//! which are then oriented and pruned of indirect causes.

pub mod data;
pub mod error;
pub mod forecaster;
pub mod gc;
pub mod graph;
pub mod linear;
pub mod metrics;
pub mod pipeline;
pub mod simgen;
mod util;

pub use error::{Error, Result};
pub use util::{derive_seed, json_digest};

use log::warn;
use serde::{Deserialize, Serialize};

use super::{Individual, LongitudinalDataset};
use crate::error::{Error, Result};

/// Where standardization statistics come from during discovery.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StandardizeScheme {
    /// Fit once on the full dataset before splitting.
    #[default]
    Global,
    /// Fit on each split's training individuals only.
    TrainingFold,
}

/// Per-variable affine map to zero mean and unit variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub variable_names: Vec<String>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    /// Variables whose observed cells had zero variance; their std is forced to 1.
    pub degenerate: Vec<bool>,
}

impl Standardizer {
    /// Fits mean and population standard deviation over observed cells only.
    pub fn fit(data: &LongitudinalDataset) -> Result<Self> {
        let k = data.n_vars();
        let mut count = vec![0usize; k];
        let mut mean = vec![0.0; k];
        for ind in data.individuals() {
            for t in 0..ind.n_timepoints() {
                for v in 0..k {
                    if let Some(x) = ind.value(t, v) {
                        count[v] += 1;
                        mean[v] += x;
                    }
                }
            }
        }
        for v in 0..k {
            if count[v] == 0 {
                return Err(Error::NoObservations(data.variable_names()[v].clone()));
            }
            mean[v] /= count[v] as f64;
        }
        // Second pass keeps the variance numerically stable.
        let mut ss = vec![0.0; k];
        for ind in data.individuals() {
            for t in 0..ind.n_timepoints() {
                for v in 0..k {
                    if let Some(x) = ind.value(t, v) {
                        ss[v] += (x - mean[v]).powi(2);
                    }
                }
            }
        }
        let mut std = vec![1.0; k];
        let mut degenerate = vec![false; k];
        for v in 0..k {
            let s = (ss[v] / count[v] as f64).sqrt();
            if s > 0.0 && s.is_finite() {
                std[v] = s;
            } else {
                warn!(
                    "variable `{}` has zero variance; std set to 1",
                    data.variable_names()[v]
                );
                degenerate[v] = true;
            }
        }
        Ok(Self {
            variable_names: data.variable_names().to_vec(),
            mean,
            std,
            degenerate,
        })
    }

    fn check_covers(&self, data: &LongitudinalDataset) -> Result<()> {
        if self.variable_names != data.variable_names() {
            return Err(Error::Data(
                "standardizer variables do not match dataset variables".into(),
            ));
        }
        Ok(())
    }

    pub fn apply(&self, data: &LongitudinalDataset) -> Result<LongitudinalDataset> {
        self.check_covers(data)?;
        Ok(data.map_individuals(|ind| self.apply_individual(ind)))
    }

    pub fn invert(&self, data: &LongitudinalDataset) -> Result<LongitudinalDataset> {
        self.check_covers(data)?;
        Ok(data.map_individuals(|ind| ind.map_observed(|v, x| x * self.std[v] + self.mean[v])))
    }

    pub fn apply_individual(&self, ind: &Individual) -> Individual {
        ind.map_observed(|v, x| (x - self.mean[v]) / self.std[v])
    }
}

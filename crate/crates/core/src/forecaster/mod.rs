//! Multi-output recurrent next-step forecaster trained with input-feature
//! dropout, so one model serves as both the full-history and the
//! variable-withheld predictor.

mod adam;
mod checkpoint;
pub mod network;
mod params;
mod train;

pub use adam::Adam;
pub use checkpoint::{load_checkpoint, save_checkpoint};
pub use network::{ImputeMode, SeqBatch};
pub use params::{Block, GruParams};
pub use train::{train, DropoutScheme, TrainConfig, TrainHistory};

use std::collections::BTreeSet;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::data::{Individual, LongitudinalDataset, Standardizer};
use crate::error::{Error, Result};

/// Variables withheld from the model input for an entire sequence.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MaskSpec {
    withheld: BTreeSet<usize>,
}

impl MaskSpec {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn single(v: usize) -> Self {
        Self {
            withheld: BTreeSet::from([v]),
        }
    }

    /// Fails if the set is out of range or withholds every variable.
    pub fn new(withheld: impl IntoIterator<Item = usize>, n_vars: usize) -> Result<Self> {
        let withheld: BTreeSet<usize> = withheld.into_iter().collect();
        if withheld.iter().any(|&v| v >= n_vars) {
            return Err(Error::Config("mask index out of range".into()));
        }
        if n_vars > 0 && withheld.len() >= n_vars {
            return Err(Error::Config("mask cannot withhold every variable".into()));
        }
        Ok(Self { withheld })
    }

    pub fn contains(&self, v: usize) -> bool {
        self.withheld.contains(&v)
    }

    pub fn to_flags(&self, n_vars: usize) -> Vec<bool> {
        (0..n_vars).map(|v| self.withheld.contains(&v)).collect()
    }
}

/// Trained forecaster plus everything needed to reproduce its inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastModel {
    pub params: GruParams,
    pub variable_names: Vec<String>,
    pub impute: ImputeMode,
    /// Statistics the inputs were standardized with, if known.
    pub standardizer: Option<Standardizer>,
    pub config_digest: String,
    #[serde(default)]
    pub history: TrainHistory,
}

impl ForecastModel {
    pub fn n_vars(&self) -> usize {
        self.params.n_vars
    }

    pub fn hidden_size(&self) -> usize {
        self.params.hidden
    }

    fn check_vars(&self, n_vars: usize) -> Result<()> {
        if n_vars != self.n_vars() {
            return Err(Error::Data(format!(
                "variable-count mismatch: model has {}, data has {n_vars}",
                self.n_vars()
            )));
        }
        Ok(())
    }

    /// Forecast matrix `timepoints x n_vars`; row `t` predicts timepoint `t+1`.
    pub fn forward_sequence(&self, ind: &Individual, mask: &MaskSpec) -> Result<Array2<f64>> {
        self.check_vars(ind.n_vars())?;
        let flags = mask.to_flags(self.n_vars());
        Ok(network::predict_one(&self.params, ind, &flags, self.impute))
    }

    /// Per-variable `(sum of squared errors, observed target count)` over all
    /// individuals and timepoints `t >= 1`, with `mask` applied to every sequence.
    pub fn squared_errors(&self, data: &LongitudinalDataset, mask: &MaskSpec) -> Result<Vec<(f64, usize)>> {
        self.check_vars(data.n_vars())?;
        let k = self.n_vars();
        let flags = mask.to_flags(k);
        let mut acc = vec![(0.0, 0usize); k];
        for chunk in data.individuals().chunks(256) {
            let batch = SeqBatch::new(chunk.iter().map(|i| (i, flags.as_slice())));
            let preds = network::predict(&self.params, &batch, self.impute);
            for t in 1..batch.steps {
                let p = &preds[t - 1];
                for b in 0..batch.size {
                    for (v, a) in acc.iter_mut().enumerate() {
                        if let Some(y) = batch.target(t, b, v) {
                            a.0 += (p[[b, v]] - y).powi(2);
                            a.1 += 1;
                        }
                    }
                }
            }
        }
        Ok(acc)
    }

    /// Mean squared error of `target` over every observed cell at `t >= 1`.
    pub fn evaluate_mse(&self, test: &LongitudinalDataset, target: usize, mask: &MaskSpec) -> Result<f64> {
        if target >= self.n_vars() {
            return Err(Error::Config(format!("target index {target} out of range")));
        }
        let (sse, n) = self.squared_errors(test, mask)?[target];
        if n == 0 {
            return Err(Error::NoObservations(self.variable_names[target].clone()));
        }
        Ok(sse / n as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn model(k: usize, h: usize, seed: u64) -> ForecastModel {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ForecastModel {
            params: GruParams::init(k, h, &mut rng),
            variable_names: (0..k).map(|v| format!("v{v}")).collect(),
            impute: ImputeMode::SelfPredict,
            standardizer: None,
            config_digest: String::new(),
            history: TrainHistory::default(),
        }
    }

    fn dataset(rows: &[(&str, Vec<Vec<Option<f64>>>)]) -> LongitudinalDataset {
        let k = rows[0].1[0].len();
        let inds = rows
            .iter()
            .map(|(id, r)| {
                let times = (0..r.len()).map(|t| t as f64).collect();
                let vals = r.iter().flatten().map(|c| c.unwrap_or(0.0)).collect();
                let mask = r.iter().flatten().map(Option::is_some).collect();
                Individual::new(*id, times, k, vals, mask).unwrap()
            })
            .collect();
        LongitudinalDataset::new((0..k).map(|v| format!("v{v}")).collect(), inds).unwrap()
    }

    #[test]
    fn mask_cannot_cover_everything() {
        assert!(MaskSpec::new([0, 1], 2).is_err());
        assert!(MaskSpec::new([2], 2).is_err());
        assert!(MaskSpec::new([1], 2).is_ok());
    }

    #[test]
    fn single_timepoint_gives_one_row_from_zero_inputs() {
        let m = model(2, 4, 1);
        let d = dataset(&[("a", vec![vec![Some(0.3), Some(-1.0)]])]);
        let out = m.forward_sequence(&d.individuals()[0], &MaskSpec::none()).unwrap();
        assert_eq!(out.dim(), (1, 2));
        // Only the input at t=0 matters; withholding everything but one
        // variable must change the forecast unless inputs were zero anyway.
        let zero = dataset(&[("a", vec![vec![None, None]])]);
        let out0 = m.forward_sequence(&zero.individuals()[0], &MaskSpec::none()).unwrap();
        let masked = m
            .forward_sequence(&d.individuals()[0], &MaskSpec::new([0], 2).unwrap())
            .unwrap();
        assert_eq!(out0.dim(), (1, 2));
        assert_ne!(out0, out);
        assert_ne!(masked, out);
    }

    #[test]
    fn masking_an_unobserved_variable_changes_nothing() {
        let m = model(3, 5, 2);
        let d = dataset(&[(
            "a",
            vec![
                vec![Some(0.1), None, Some(1.0)],
                vec![Some(0.2), None, None],
                vec![Some(0.4), None, Some(0.5)],
            ],
        )]);
        let ind = &d.individuals()[0];
        let a = m.forward_sequence(ind, &MaskSpec::none()).unwrap();
        let b = m.forward_sequence(ind, &MaskSpec::single(1)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_input_weights_make_masking_irrelevant_for_others() {
        let mut m = model(3, 6, 3);
        // Cut every path from variable 1's input into the hidden state.
        m.params.mat_mut(Block::InputWeights).row_mut(1).fill(0.0);
        let d = dataset(&[(
            "a",
            vec![
                vec![Some(0.1), Some(2.0), Some(1.0)],
                vec![Some(0.2), Some(-1.0), Some(0.3)],
                vec![Some(0.4), Some(0.7), Some(0.5)],
                vec![Some(0.1), Some(0.9), Some(0.2)],
            ],
        )]);
        let ind = &d.individuals()[0];
        let a = m.forward_sequence(ind, &MaskSpec::none()).unwrap();
        let b = m.forward_sequence(ind, &MaskSpec::single(1)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn evaluate_mse_matches_scalar_loop() {
        let m = model(2, 4, 4);
        let d = dataset(&[
            (
                "a",
                vec![vec![Some(0.1), Some(2.0)], vec![Some(0.2), None], vec![None, Some(0.5)]],
            ),
            ("b", vec![vec![Some(1.0), Some(0.0)], vec![Some(-0.5), Some(0.3)]]),
        ]);
        for target in 0..2 {
            let mut sse = 0.0;
            let mut n = 0;
            for ind in d.individuals() {
                let pred = m.forward_sequence(ind, &MaskSpec::none()).unwrap();
                for t in 1..ind.n_timepoints() {
                    if let Some(y) = ind.value(t, target) {
                        sse += (pred[[t - 1, target]] - y).powi(2);
                        n += 1;
                    }
                }
            }
            let got = m.evaluate_mse(&d, target, &MaskSpec::none()).unwrap();
            assert!((got - sse / n as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn no_observed_targets_is_an_error() {
        let m = model(2, 3, 5);
        let d = dataset(&[("a", vec![vec![Some(0.1), None], vec![Some(0.2), None]])]);
        assert!(matches!(
            m.evaluate_mse(&d, 1, &MaskSpec::none()),
            Err(Error::NoObservations(_))
        ));
        assert!(m.evaluate_mse(&d, 0, &MaskSpec::none()).unwrap() >= 0.0);
    }

    #[test]
    fn variable_count_mismatch_is_rejected() {
        let m = model(3, 3, 6);
        let d = dataset(&[("a", vec![vec![Some(0.1), Some(0.2)]])]);
        assert!(m.forward_sequence(&d.individuals()[0], &MaskSpec::none()).is_err());
    }
}

use log::debug;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::network::{self, ImputeMode, SeqBatch};
use super::{Adam, ForecastModel, GruParams};
use crate::data::{Individual, LongitudinalDataset};
use crate::error::{Error, Result};
use crate::util::json_digest;

/// How each mini-batch is augmented with withheld-variable copies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropoutScheme {
    /// Every sequence appears once unmasked and once with one uniformly
    /// drawn variable withheld for the whole sequence.
    #[default]
    SingleVariable,
    /// No augmentation.
    Off,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub hidden_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub batch_size: usize,
    pub dropout: DropoutScheme,
    pub impute: ImputeMode,
    /// Forecast the change from the current input instead of the level.
    pub residual: bool,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 3e-4,
            hidden_size: 256,
            max_epochs: 200,
            patience: 10,
            batch_size: 64,
            dropout: DropoutScheme::SingleVariable,
            impute: ImputeMode::SelfPredict,
            residual: true,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config("learning_rate must be positive".into()));
        }
        if self.patience < 1 {
            return Err(Error::Config("patience must be at least 1".into()));
        }
        if self.hidden_size == 0 || self.batch_size == 0 || self.max_epochs == 0 {
            return Err(Error::Config(
                "hidden_size, batch_size and max_epochs must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub epochs_run: usize,
    pub best_epoch: usize,
    pub best_val_loss: f64,
    pub val_losses: Vec<f64>,
}

fn withheld_flags(n_vars: usize, v: Option<usize>) -> Vec<bool> {
    (0..n_vars).map(|i| Some(i) == v).collect()
}

/// Fixed validation set: each individual unmasked plus one withheld copy
/// drawn once, so the early-stopping signal matches the training objective.
struct Validation<'a> {
    seqs: Vec<(&'a Individual, Vec<bool>)>,
}

impl<'a> Validation<'a> {
    fn new(val: &'a LongitudinalDataset, scheme: DropoutScheme, rng: &mut ChaCha8Rng) -> Self {
        let k = val.n_vars();
        let mut seqs = Vec::new();
        for ind in val.individuals() {
            seqs.push((ind, withheld_flags(k, None)));
            if scheme == DropoutScheme::SingleVariable && k > 1 {
                seqs.push((ind, withheld_flags(k, Some(rng.random_range(0..k)))));
            }
        }
        Self { seqs }
    }

    fn loss(&self, params: &GruParams, mode: ImputeMode) -> f64 {
        let mut sse = 0.0;
        let mut n = 0;
        for chunk in self.seqs.chunks(256) {
            let batch = SeqBatch::new(chunk.iter().map(|(i, f)| (*i, f.as_slice())));
            let (s, c) = network::loss_sum(params, &batch, mode);
            sse += s;
            n += c;
        }
        if n == 0 {
            0.0
        } else {
            sse / n as f64
        }
    }
}

/// Trains on `train`, early-stopping on `val`; returns the snapshot with the
/// lowest validation loss. Inputs are expected to be standardized already.
pub fn train(train: &LongitudinalDataset, val: &LongitudinalDataset, cfg: &TrainConfig) -> Result<ForecastModel> {
    cfg.validate()?;
    if train.is_empty() {
        return Err(Error::Data("empty training split".into()));
    }
    if val.is_empty() {
        return Err(Error::Data("empty validation split".into()));
    }
    if train.variable_names() != val.variable_names() {
        return Err(Error::Data("training and validation variables differ".into()));
    }
    let k = train.n_vars();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut params = GruParams::init(k, cfg.hidden_size, &mut rng).with_residual(cfg.residual);
    let mut grad = GruParams::zeros(k, cfg.hidden_size);
    let mut opt = Adam::new(params.data.len(), cfg.learning_rate);
    let validation = Validation::new(val, cfg.dropout, &mut rng);

    let mut best = params.clone();
    let mut history = TrainHistory {
        best_val_loss: validation.loss(&params, cfg.impute),
        ..Default::default()
    };
    let mut since_best = 0;
    let mut order: Vec<usize> = (0..train.len()).collect();
    let none = withheld_flags(k, None);
    let singles: Vec<Vec<bool>> = (0..k).map(|v| withheld_flags(k, Some(v))).collect();

    for epoch in 1..=cfg.max_epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(cfg.batch_size) {
            let mut seqs: Vec<(&Individual, &[bool])> = Vec::with_capacity(2 * chunk.len());
            for &i in chunk {
                let ind = &train.individuals()[i];
                seqs.push((ind, &none));
                if cfg.dropout == DropoutScheme::SingleVariable && k > 1 {
                    seqs.push((ind, &singles[rng.random_range(0..k)]));
                }
            }
            let batch = SeqBatch::new(seqs);
            let Some(loss) = network::loss_and_grad(&params, &batch, cfg.impute, &mut grad) else {
                continue;
            };
            if !loss.is_finite() || !grad.is_finite() {
                return Err(Error::Diverged {
                    epoch,
                    detail: format!("non-finite training loss {loss}"),
                });
            }
            opt.step(&mut params.data, &grad.data);
        }
        if !params.is_finite() {
            return Err(Error::Diverged {
                epoch,
                detail: "non-finite parameters".into(),
            });
        }
        let val_loss = validation.loss(&params, cfg.impute);
        if !val_loss.is_finite() {
            return Err(Error::Diverged {
                epoch,
                detail: format!("non-finite validation loss {val_loss}"),
            });
        }
        history.val_losses.push(val_loss);
        history.epochs_run = epoch;
        if val_loss < history.best_val_loss {
            history.best_val_loss = val_loss;
            history.best_epoch = epoch;
            best.data.copy_from_slice(&params.data);
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= cfg.patience {
                debug!("early stop at epoch {epoch}, best {}", history.best_epoch);
                break;
            }
        }
    }

    Ok(ForecastModel {
        params: best,
        variable_names: train.variable_names().to_vec(),
        impute: cfg.impute,
        standardizer: None,
        config_digest: json_digest(cfg),
        history,
    })
}

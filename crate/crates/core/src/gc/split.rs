use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::util::derive_seed;

pub const FOLDS: usize = 5;

/// Repeated 5-fold assignment of individual ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub repetitions: usize,
    /// `assignments[rep][fold]` lists the ids in that fold, sorted.
    pub assignments: Vec<Vec<Vec<String>>>,
}

/// One train/validation/test triple (3:1:1 by folds).
#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub index: usize,
    pub repetition: usize,
    pub fold: usize,
    pub train: Vec<String>,
    pub validation: Vec<String>,
    pub test: Vec<String>,
}

/// Shuffles the (sorted) ids once per repetition and cuts them into five
/// near-equal contiguous folds. The plan depends only on the id set and seed.
pub fn make_split_plan(ids: &[String], repetitions: usize, seed: u64) -> Result<SplitPlan> {
    if ids.len() < FOLDS {
        return Err(Error::Config(format!(
            "need at least {FOLDS} individuals for cross-validation, got {}",
            ids.len()
        )));
    }
    if repetitions == 0 {
        return Err(Error::Config("repetitions must be at least 1".into()));
    }
    let mut sorted: Vec<String> = ids.to_vec();
    sorted.sort();
    let n = sorted.len();
    let mut assignments = Vec::with_capacity(repetitions);
    for rep in 0..repetitions {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, "split-plan", rep as u64));
        let mut shuffled = sorted.clone();
        shuffled.shuffle(&mut rng);
        let folds = (0..FOLDS)
            .map(|f| {
                let mut fold = shuffled[f * n / FOLDS..(f + 1) * n / FOLDS].to_vec();
                fold.sort();
                fold
            })
            .collect();
        assignments.push(folds);
    }
    Ok(SplitPlan {
        repetitions,
        assignments,
    })
}

impl SplitPlan {
    pub fn n_splits(&self) -> usize {
        self.repetitions * FOLDS
    }

    /// Split `k` of a repetition tests on fold `k`, validates on fold
    /// `(k + 1) mod 5` and trains on the remaining three.
    pub fn splits(&self) -> Vec<Split> {
        let mut out = Vec::with_capacity(self.n_splits());
        for (rep, folds) in self.assignments.iter().enumerate() {
            for k in 0..FOLDS {
                let val = (k + 1) % FOLDS;
                let mut train: Vec<String> = (0..FOLDS)
                    .filter(|&f| f != k && f != val)
                    .flat_map(|f| folds[f].iter().cloned())
                    .collect();
                train.sort();
                out.push(Split {
                    index: rep * FOLDS + k,
                    repetition: rep,
                    fold: k,
                    train,
                    validation: folds[val].clone(),
                    test: folds[k].clone(),
                });
            }
        }
        out
    }
}

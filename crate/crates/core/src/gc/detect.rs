use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::split::{make_split_plan, Split, SplitPlan};
use super::ttest::{one_sample_t_test, Alternative, TTest};
use crate::data::{LongitudinalDataset, StandardizeScheme, Standardizer};
use crate::error::{Error, Result};
use crate::forecaster::{train, ForecastModel, MaskSpec, TrainConfig, TrainHistory};
use crate::graph::CausalGraph;
use crate::util::derive_seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GcConfig {
    pub train: TrainConfig,
    pub repetitions: usize,
    pub alpha: f64,
    pub alternative: Alternative,
    pub seed: u64,
    /// Concurrent split jobs; 0 means one per available core.
    pub workers: usize,
    pub standardize: StandardizeScheme,
}

impl Default for GcConfig {
    fn default() -> Self {
        Self {
            train: TrainConfig::default(),
            repetitions: 4,
            alpha: 0.05,
            alternative: Alternative::Greater,
            seed: 0,
            workers: 0,
            standardize: StandardizeScheme::Global,
        }
    }
}

impl GcConfig {
    pub fn validate(&self) -> Result<()> {
        self.train.validate()?;
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config("alpha must be in (0, 1)".into()));
        }
        if self.repetitions == 0 {
            return Err(Error::Config("repetitions must be at least 1".into()));
        }
        Ok(())
    }
}

/// `ΔMSE(u, v)` on `test`: error predicting `v` with `u` withheld minus the
/// error with full input. Positive values mean `u` helps predict `v`.
pub fn compute_delta_mse(
    model: &ForecastModel,
    test: &LongitudinalDataset,
    cause: usize,
    effect: usize,
) -> Result<f64> {
    if cause == effect {
        return Err(Error::Config("cause and effect must differ".into()));
    }
    let masked = model.evaluate_mse(test, effect, &MaskSpec::single(cause))?;
    let full = model.evaluate_mse(test, effect, &MaskSpec::none())?;
    Ok(masked - full)
}

/// Per-pair ΔMSE across splits with the derived t-test.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaMseTable {
    pub variables: Vec<String>,
    pub n_splits: usize,
    pub alternative: Alternative,
    /// Indexed by `cause * k + effect`; one entry per split, `None` if missing.
    samples: Vec<Vec<Option<f64>>>,
    stats: Vec<Option<TTest>>,
}

impl DeltaMseTable {
    /// Builds from per-split vectors of pair samples (split-major).
    pub fn from_splits(variables: Vec<String>, per_split: &[Vec<Option<f64>>], alternative: Alternative) -> Self {
        let k = variables.len();
        let n_splits = per_split.len();
        let mut samples = vec![Vec::with_capacity(n_splits); k * k];
        for split in per_split {
            for (p, s) in split.iter().enumerate() {
                samples[p].push(*s);
            }
        }
        let stats = (0..k * k)
            .map(|p| {
                let (u, v) = (p / k, p % k);
                if u == v {
                    return None;
                }
                let present: Vec<f64> = samples[p].iter().flatten().copied().collect();
                let missing = n_splits - present.len();
                if 2 * missing > n_splits {
                    return None;
                }
                one_sample_t_test(&present, alternative)
            })
            .collect();
        Self {
            variables,
            n_splits,
            alternative,
            samples,
            stats,
        }
    }

    fn k(&self) -> usize {
        self.variables.len()
    }

    pub fn samples(&self, cause: usize, effect: usize) -> &[Option<f64>] {
        &self.samples[cause * self.k() + effect]
    }

    /// `None` for the diagonal and for untestable pairs.
    pub fn test(&self, cause: usize, effect: usize) -> Option<&TTest> {
        self.stats[cause * self.k() + effect].as_ref()
    }

    /// Off-diagonal pairs whose test could not be run.
    pub fn untestable(&self) -> Vec<(usize, usize)> {
        let k = self.k();
        (0..k)
            .flat_map(|u| (0..k).map(move |v| (u, v)))
            .filter(|&(u, v)| u != v && self.test(u, v).is_none())
            .collect()
    }

    /// Edge `u -> v` with score `t` for every pair with `p < alpha` and `t > 0`.
    pub fn candidate_graph(&self, alpha: f64) -> CausalGraph {
        let k = self.k();
        let mut g = CausalGraph::new(self.variables.clone());
        for u in 0..k {
            for v in 0..k {
                if let Some(t) = self.test(u, v) {
                    if t.p < alpha && t.t > 0.0 {
                        g.add_edge(u, v, t.t).expect("off-diagonal");
                    }
                }
            }
        }
        g
    }

    /// `cause,effect,split,delta_mse`; missing samples have an empty value.
    pub fn write_samples_csv(&self, w: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(w);
        w.write_record(["cause", "effect", "split", "delta_mse"])?;
        let k = self.k();
        for u in 0..k {
            for v in 0..k {
                if u == v {
                    continue;
                }
                for (s, x) in self.samples(u, v).iter().enumerate() {
                    let val = x.map(fmt_f64).unwrap_or_default();
                    w.write_record([&self.variables[u], &self.variables[v], &s.to_string(), &val])?;
                }
            }
        }
        w.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }

    /// `cause,effect,t,p`; untestable pairs have empty statistics.
    pub fn write_summary_csv(&self, w: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(w);
        w.write_record(["cause", "effect", "t", "p"])?;
        let k = self.k();
        for u in 0..k {
            for v in 0..k {
                if u == v {
                    continue;
                }
                let (t, p) = match self.test(u, v) {
                    Some(t) => (fmt_f64(t.t), fmt_f64(t.p)),
                    None => (String::new(), String::new()),
                };
                w.write_record([&self.variables[u], &self.variables[v], &t, &p])?;
            }
        }
        w.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }

    pub fn save(&self, samples_path: impl AsRef<Path>, summary_path: impl AsRef<Path>) -> Result<()> {
        let (a, b) = (samples_path.as_ref(), summary_path.as_ref());
        self.write_samples_csv(std::fs::File::create(a).map_err(|e| Error::io(a, e))?)?;
        self.write_summary_csv(std::fs::File::create(b).map_err(|e| Error::io(b, e))?)
    }

    /// Reads a `cause,effect,split,delta_mse` file back into a table.
    pub fn load_samples(path: impl AsRef<Path>, alternative: Alternative) -> Result<Self> {
        let path = path.as_ref();
        let mut rdr = csv::Reader::from_path(path)?;
        let mut variables: Vec<String> = Vec::new();
        let mut rows = Vec::new();
        let mut n_splits = 0;
        for rec in rdr.records() {
            let rec = rec?;
            let split: usize = rec[2]
                .parse()
                .map_err(|_| Error::Data(format!("bad split index `{}`", &rec[2])))?;
            let val = if rec[3].is_empty() {
                None
            } else {
                Some(
                    rec[3]
                        .parse::<f64>()
                        .map_err(|_| Error::Data(format!("bad ΔMSE `{}`", &rec[3])))?,
                )
            };
            for name in [&rec[0], &rec[1]] {
                if !variables.iter().any(|v| v == name) {
                    variables.push(name.to_string());
                }
            }
            n_splits = n_splits.max(split + 1);
            rows.push((rec[0].to_string(), rec[1].to_string(), split, val));
        }
        let k = variables.len();
        let idx: HashMap<&str, usize> = variables.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
        let mut per_split = vec![vec![None; k * k]; n_splits];
        for (u, v, s, val) in &rows {
            per_split[*s][idx[u.as_str()] * k + idx[v.as_str()]] = *val;
        }
        Ok(Self::from_splits(variables, &per_split, alternative))
    }
}

fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Output of the association-detection step.
#[derive(Debug, Clone)]
pub struct Detection {
    pub table: DeltaMseTable,
    pub candidate: CausalGraph,
    pub plan: SplitPlan,
    pub histories: Vec<TrainHistory>,
}

fn subset_by_ids(data: &LongitudinalDataset, index: &HashMap<&str, usize>, ids: &[String]) -> LongitudinalDataset {
    let rows: Vec<usize> = ids.iter().map(|id| index[id.as_str()]).collect();
    data.subset(&rows)
}

/// Trains one forecaster per split and fills the ΔMSE samples for every ordered pair.
fn run_split(data: &LongitudinalDataset, split: &Split, cfg: &GcConfig) -> Result<(Vec<Option<f64>>, TrainHistory)> {
    let index: HashMap<&str, usize> = data
        .individuals()
        .iter()
        .enumerate()
        .map(|(i, ind)| (ind.id(), i))
        .collect();
    let mut train_set = subset_by_ids(data, &index, &split.train);
    let mut val_set = subset_by_ids(data, &index, &split.validation);
    let mut test_set = subset_by_ids(data, &index, &split.test);
    let mut standardizer = None;
    if cfg.standardize == StandardizeScheme::TrainingFold {
        let s = Standardizer::fit(&train_set)?;
        train_set = s.apply(&train_set)?;
        val_set = s.apply(&val_set)?;
        test_set = s.apply(&test_set)?;
        standardizer = Some(s);
    }
    let tcfg = TrainConfig {
        seed: derive_seed(cfg.seed, "split-train", split.index as u64),
        ..cfg.train.clone()
    };
    let mut model = train(&train_set, &val_set, &tcfg)?;
    model.standardizer = standardizer;

    let k = data.n_vars();
    let full = model.squared_errors(&test_set, &MaskSpec::none())?;
    let mut out = vec![None; k * k];
    for u in 0..k {
        let masked = model.squared_errors(&test_set, &MaskSpec::single(u))?;
        for v in 0..k {
            if u == v || full[v].1 == 0 {
                continue;
            }
            let mse_full = full[v].0 / full[v].1 as f64;
            let mse_masked = masked[v].0 / masked[v].1 as f64;
            out[u * k + v] = Some(mse_masked - mse_full);
        }
    }
    info!(
        "split {} done: {} epochs, best val {:.5}",
        split.index, model.history.epochs_run, model.history.best_val_loss
    );
    Ok((out, model.history))
}

/// Association detection: repeated cross-validation, one forecaster per
/// split, ΔMSE on held-out individuals, then a t-test per ordered pair.
pub fn detect_edges(data: &LongitudinalDataset, cfg: &GcConfig) -> Result<Detection> {
    cfg.validate()?;
    let data = match cfg.standardize {
        StandardizeScheme::Global => Standardizer::fit(data)?.apply(data)?,
        StandardizeScheme::TrainingFold => data.clone(),
    };
    let plan = make_split_plan(&data.ids(), cfg.repetitions, derive_seed(cfg.seed, "splits", 0))?;
    let splits = plan.splits();
    let workers = if cfg.workers == 0 {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    } else {
        cfg.workers
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let results: Vec<Result<(Vec<Option<f64>>, TrainHistory)>> =
        pool.install(|| splits.par_iter().map(|s| run_split(&data, s, cfg)).collect());
    let mut per_split = Vec::with_capacity(results.len());
    let mut histories = Vec::with_capacity(results.len());
    for r in results {
        let (samples, h) = r?;
        per_split.push(samples);
        histories.push(h);
    }
    let table = DeltaMseTable::from_splits(data.variable_names().to_vec(), &per_split, cfg.alternative);
    for (u, v) in table.untestable() {
        warn!("pair {} -> {} is untestable", table.variables[u], table.variables[v]);
    }
    let candidate = table.candidate_graph(cfg.alpha);
    Ok(Detection {
        table,
        candidate,
        plan,
        histories,
    })
}

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use super::GroundTruthGraph;
use crate::data::{Individual, LongitudinalDataset, Meta, Standardizer};
use crate::error::{Error, Result};
use crate::util::{derive_seed, json_digest};

/// Latent series cover integer steps `0..=100`.
pub const LATENT_STEPS: usize = 101;
const WINDOW_START_MIN: usize = 30;
const WINDOW_START_MAX: usize = 70;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplePath {
    /// Cumulative sum of standard normal increments.
    #[default]
    GaussianRandomWalk,
    /// `A / (1 + exp(-k (t - t0)))` with per-individual random parameters.
    Sigmoid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    /// Builtin graph name or path to a graph spec file.
    pub graph: String,
    pub sample_path: SamplePath,
    pub n_individuals: usize,
    pub n_timepoints: usize,
    pub lag: usize,
    pub noise_sigma: f64,
    pub missing_rate: f64,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            graph: "basic7".into(),
            sample_path: SamplePath::GaussianRandomWalk,
            n_individuals: 2000,
            n_timepoints: 6,
            lag: 1,
            noise_sigma: 0.1,
            missing_rate: 0.0,
            seed: 0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.lag < 1 {
            return Err(Error::Config("lag must be at least 1".into()));
        }
        if self.n_timepoints < 2 {
            return Err(Error::Config("n_timepoints must be at least 2".into()));
        }
        if WINDOW_START_MAX + self.n_timepoints > LATENT_STEPS {
            return Err(Error::Config(format!(
                "observation window of {} steps starting as late as {WINDOW_START_MAX} overflows step {}",
                self.n_timepoints,
                LATENT_STEPS - 1
            )));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::Config("noise_sigma must be non-negative".into()));
        }
        if !(0.0..1.0).contains(&self.missing_rate) {
            return Err(Error::Config("missing_rate must be in [0, 1)".into()));
        }
        if self.n_individuals == 0 {
            return Err(Error::Config("n_individuals must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmoidParams {
    pub amplitude: f64,
    pub midpoint: f64,
    pub rate: f64,
}

/// Everything drawn for one individual, kept so outputs can be reconstructed.
#[derive(Debug, Clone)]
pub struct LatentIndividual {
    pub individual: Individual,
    /// Per node, the full series over `0..=100` including measurement noise.
    pub series: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
    /// Sigmoid parameters for source nodes when that path is used.
    pub sigmoid: Vec<Option<SigmoidParams>>,
    pub window_start: usize,
}

/// `w = s * m`, `s` a fair sign and `m ~ Unif(0.5, 1)`, one per edge in edge order.
pub fn sample_weights(n_edges: usize, rng: &mut impl Rng) -> Vec<f64> {
    (0..n_edges)
        .map(|_| {
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            sign * rng.random_range(0.5..=1.0)
        })
        .collect()
}

fn source_path(path: SamplePath, rng: &mut impl Rng) -> (Vec<f64>, Option<SigmoidParams>) {
    match path {
        SamplePath::GaussianRandomWalk => {
            let mut acc = 0.0;
            let f = (0..LATENT_STEPS)
                .map(|_| {
                    let step: f64 = StandardNormal.sample(rng);
                    acc += step;
                    acc
                })
                .collect();
            (f, None)
        }
        SamplePath::Sigmoid => {
            let p = SigmoidParams {
                amplitude: rng.random_range(1.0..=2.0),
                midpoint: rng.random_range(40.0..=60.0),
                rate: rng.random_range(0.1..=0.3),
            };
            let f = (0..LATENT_STEPS)
                .map(|t| p.amplitude / (1.0 + (-p.rate * (t as f64 - p.midpoint)).exp()))
                .collect();
            (f, Some(p))
        }
    }
}

/// Draws one individual's latent series in topological order and extracts
/// `n_timepoints` consecutive steps from a window starting uniformly in
/// `[30, 70]`. Parent values before step 0 count as zero.
pub fn generate_individual(
    id: impl Into<String>,
    graph: &GroundTruthGraph,
    weights: &[f64],
    cfg: &SimConfig,
    rng: &mut impl Rng,
) -> Result<LatentIndividual> {
    cfg.validate()?;
    if weights.len() != graph.edges().len() {
        return Err(Error::Config("one weight per edge required".into()));
    }
    let n = graph.n_nodes();
    let order = graph.topological_order()?;
    let noise = if cfg.noise_sigma > 0.0 {
        Some(Normal::new(0.0, cfg.noise_sigma).expect("valid sigma"))
    } else {
        None
    };
    let mut series = vec![Vec::new(); n];
    let mut bias = vec![0.0; n];
    let mut sigmoid = vec![None; n];
    for &v in &order {
        let b: f64 = rng.random_range(-0.5..=0.5);
        bias[v] = b;
        let parents: Vec<(usize, usize)> = graph.parents(v).collect();
        let mut s: Vec<f64> = if parents.is_empty() {
            let (f, params) = source_path(cfg.sample_path, rng);
            sigmoid[v] = params;
            f.into_iter().map(|x| b + x).collect()
        } else {
            (0..LATENT_STEPS)
                .map(|t| {
                    let lagged: f64 = parents
                        .iter()
                        .map(|&(p, e)| {
                            if t >= cfg.lag {
                                weights[e] * series[p][t - cfg.lag]
                            } else {
                                0.0
                            }
                        })
                        .sum();
                    b + lagged
                })
                .collect()
        };
        if let Some(noise) = &noise {
            for x in &mut s {
                *x += noise.sample(rng);
            }
        }
        series[v] = s;
    }
    let window_start = rng.random_range(WINDOW_START_MIN..=WINDOW_START_MAX);
    let end = window_start + cfg.n_timepoints;
    if end > LATENT_STEPS {
        return Err(Error::Config("observation window overflows the latent series".into()));
    }
    let times: Vec<f64> = (window_start..end).map(|t| t as f64).collect();
    let mut values = Vec::with_capacity(cfg.n_timepoints * n);
    for t in window_start..end {
        for s in &series {
            values.push(s[t]);
        }
    }
    let observed = vec![true; values.len()];
    let individual = Individual::new(id, times, n, values, observed)?;
    Ok(LatentIndividual {
        individual,
        series,
        bias,
        sigmoid,
        window_start,
    })
}

/// Drops each cell independently with probability `rate`.
pub fn inject_missingness(data: &LongitudinalDataset, rate: f64, rng: &mut impl Rng) -> Result<LongitudinalDataset> {
    if !(0.0..1.0).contains(&rate) {
        return Err(Error::Config("missing rate must be in [0, 1)".into()));
    }
    if rate == 0.0 {
        return Ok(data.clone());
    }
    Ok(data.map_individuals(|ind| ind.with_dropped(|_, _| rng.random_bool(rate))))
}

/// Resolves the configured graph, then generates the dataset.
pub fn generate_dataset(cfg: &SimConfig) -> Result<(LongitudinalDataset, GroundTruthGraph)> {
    let graph = GroundTruthGraph::resolve(&cfg.graph)?;
    generate_dataset_with_graph(&graph, cfg)
}

/// Samples weights once (unless the graph fixes them), draws every individual
/// from its own seeded stream, standardizes globally, then applies missingness.
/// The returned truth graph carries the weights actually used.
pub fn generate_dataset_with_graph(
    graph: &GroundTruthGraph,
    cfg: &SimConfig,
) -> Result<(LongitudinalDataset, GroundTruthGraph)> {
    cfg.validate()?;
    let weights = match graph.weights() {
        Some(w) => w.to_vec(),
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, "weights", 0));
            sample_weights(graph.edges().len(), &mut rng)
        }
    };
    let width = cfg.n_individuals.to_string().len();
    let individuals = (0..cfg.n_individuals)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, "individual", i as u64));
            generate_individual(format!("s{i:0width$}"), graph, &weights, cfg, &mut rng).map(|l| l.individual)
        })
        .collect::<Result<Vec<_>>>()?;
    let raw = LongitudinalDataset::new(graph.nodes().to_vec(), individuals)?;
    let standardized = Standardizer::fit(&raw)?.apply(&raw)?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, "missing", 0));
    let data = inject_missingness(&standardized, cfg.missing_rate, &mut rng)?;

    let truth = graph.clone().with_weights(weights)?;
    let mut meta = Meta::new();
    meta.insert("generator".into(), serde_json::to_value(cfg)?);
    meta.insert("config_digest".into(), json_digest(cfg).into());
    meta.insert("seed".into(), cfg.seed.into());
    meta.insert("graph".into(), serde_json::to_value(truth.to_spec())?);
    Ok((data.with_meta(meta), truth))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simgen::builtin_graph;

    fn cfg(graph: &str) -> SimConfig {
        SimConfig {
            graph: graph.into(),
            n_individuals: 50,
            ..Default::default()
        }
    }

    #[test]
    fn weights_are_in_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for w in sample_weights(1000, &mut rng) {
            assert!((0.5..=1.0).contains(&w.abs()));
        }
        assert!(sample_weights(0, &mut rng).is_empty());
    }

    #[test]
    fn weight_moments_match_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 10_000;
        let w = sample_weights(n, &mut rng);
        let sign_mean = w.iter().map(|x| x.signum()).sum::<f64>() / n as f64;
        let abs_mean = w.iter().map(|x| x.abs()).sum::<f64>() / n as f64;
        // sign: mean 0, sd 1; |w| ~ U(0.5, 1): mean 0.75, sd 0.5/sqrt(12)
        let nf = n as f64;
        assert!(sign_mean.abs() < 3.0 / nf.sqrt());
        assert!((abs_mean - 0.75).abs() < 3.0 * (0.5 / 12f64.sqrt()) / nf.sqrt());
    }

    #[test]
    fn no_edge_graph_is_independent_walks() {
        let g = GroundTruthGraph::from_names(&["p", "q"], &[]).unwrap();
        let c = SimConfig {
            noise_sigma: 0.0,
            ..cfg("chain3")
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let l = generate_individual("a", &g, &[], &c, &mut rng).unwrap();
        for v in 0..2 {
            // increments of a random walk plus constant bias
            let s = &l.series[v];
            assert!((s[0] - l.bias[v]).abs() < 10.0);
        }
        assert_ne!(l.series[0], l.series[1]);
    }

    #[test]
    fn chain_is_exact_lagged_copy_without_noise() {
        let g = builtin_graph("chain3").unwrap();
        for lag in [1, 3] {
            let c = SimConfig {
                noise_sigma: 0.0,
                lag,
                ..cfg("chain3")
            };
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            let w = sample_weights(2, &mut rng);
            let l = generate_individual("a", &g, &w, &c, &mut rng).unwrap();
            for t in lag..LATENT_STEPS {
                assert!((l.series[1][t] - l.bias[1] - w[0] * l.series[0][t - lag]).abs() < 1e-12);
                assert!((l.series[2][t] - l.bias[2] - w[1] * l.series[1][t - lag]).abs() < 1e-12);
            }
            for t in 0..lag {
                assert_eq!(l.series[1][t], l.bias[1]);
            }
            let ind = &l.individual;
            assert_eq!(ind.times()[0] as usize, l.window_start);
            assert!((30..=70).contains(&l.window_start));
            assert_eq!(ind.value(0, 1), Some(l.series[1][l.window_start]));
        }
    }

    #[test]
    fn sigmoid_parameters_in_range() {
        let g = builtin_graph("basic7").unwrap();
        let c = SimConfig {
            sample_path: SamplePath::Sigmoid,
            ..cfg("basic7")
        };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let w = sample_weights(g.edges().len(), &mut rng);
            let l = generate_individual("a", &g, &w, &c, &mut rng).unwrap();
            let params: Vec<_> = l.sigmoid.iter().flatten().collect();
            assert_eq!(params.len(), 2);
            for p in params {
                assert!((1.0..=2.0).contains(&p.amplitude));
                assert!((40.0..=60.0).contains(&p.midpoint));
                assert!((0.1..=0.3).contains(&p.rate));
            }
        }
    }

    #[test]
    fn window_overflow_is_rejected() {
        let c = SimConfig {
            n_timepoints: 40,
            ..cfg("chain3")
        };
        assert!(generate_dataset(&c).is_err());
        let ok = SimConfig {
            n_timepoints: 31,
            n_individuals: 3,
            ..cfg("chain3")
        };
        assert!(generate_dataset(&ok).is_ok());
    }

    #[test]
    fn dataset_shape_determinism_and_standardization() {
        let c = SimConfig {
            n_individuals: 2000,
            ..cfg("basic7")
        };
        let (d, truth) = generate_dataset(&c).unwrap();
        assert_eq!(d.len(), 2000);
        assert_eq!(d.n_vars(), 7);
        assert!(d.individuals().iter().all(|i| i.n_timepoints() == 6));
        assert_eq!(truth.weights().unwrap().len(), 6);
        let s = Standardizer::fit(&d).unwrap();
        for v in 0..7 {
            assert!(s.mean[v].abs() < 1e-9);
            assert!((s.std[v] - 1.0).abs() < 1e-9);
        }
        let (d2, _) = generate_dataset(&c).unwrap();
        assert_eq!(d, d2);
        let (d3, t3) = generate_dataset(&SimConfig { seed: 1, ..c }).unwrap();
        assert_ne!(d, d3);
        assert_eq!(t3.edges(), truth.edges());
    }

    #[test]
    fn missingness_rate_zero_is_identity() {
        let (d, _) = generate_dataset(&cfg("chain3")).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(inject_missingness(&d, 0.0, &mut rng).unwrap(), d);
        assert!(inject_missingness(&d, 1.0, &mut rng).is_err());
    }

    #[test]
    fn missingness_fraction_within_binomial_bound() {
        let c = SimConfig {
            n_individuals: 5000,
            ..cfg("basic7")
        };
        let (d, _) = generate_dataset(&c).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let dropped = inject_missingness(&d, 0.3, &mut rng).unwrap();
        let n = d.total_cells() as f64;
        assert!(n >= 1e5);
        let frac = 1.0 - dropped.observed_cells() as f64 / n;
        let sd = (0.3 * 0.7 / n).sqrt();
        assert!((frac - 0.3).abs() < 3.0 * sd, "fraction {frac}");
        // Dropped cells hold the sentinel; survivors keep their values.
        for (a, b) in d.individuals().iter().zip(dropped.individuals()) {
            for t in 0..a.n_timepoints() {
                for v in 0..a.n_vars() {
                    match b.value(t, v) {
                        Some(x) => assert_eq!(Some(x), a.value(t, v)),
                        None => assert!(b.raw_values()[t * a.n_vars() + v].is_nan()),
                    }
                }
            }
        }
    }
}

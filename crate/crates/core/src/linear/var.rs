use log::warn;
use nalgebra::{Cholesky, DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, FisherSnedecor};

use crate::data::LongitudinalDataset;
use crate::error::{Error, Result};
use crate::graph::CausalGraph;

/// Diagonal jitter added when the normal equations are not positive definite.
pub const RIDGE_JITTER: f64 = 1e-8;

/// Which lags enter both regressions of a pair test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Conditioning {
    /// Full model uses lags of every variable; restricted drops the cause.
    #[default]
    Multivariate,
    /// Full model uses lags of effect and cause only; restricted the effect only.
    Bivariate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinearGcConfig {
    pub lag: usize,
    pub alpha: f64,
    pub conditioning: Conditioning,
    /// Standardize each variable over all cells after interpolation.
    pub standardize: bool,
}

impl Default for LinearGcConfig {
    fn default() -> Self {
        Self {
            lag: 1,
            alpha: 0.05,
            conditioning: Conditioning::Multivariate,
            standardize: true,
        }
    }
}

impl LinearGcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.lag < 1 {
            return Err(Error::Config("lag must be at least 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config("alpha must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

/// Lagged regression rows stacked over individuals. A row never mixes two
/// individuals: each one contributes `T - p` rows built from its own series.
#[derive(Debug, Clone)]
pub struct LaggedDesign {
    pub n_vars: usize,
    pub lag: usize,
    /// `rows x (1 + n_vars * lag)`: intercept, then lag 1 of every variable,
    /// then lag 2, and so on.
    pub x: DMatrix<f64>,
    /// `rows x n_vars` targets.
    pub y: DMatrix<f64>,
    /// Index of the individual each row came from.
    pub owner: Vec<usize>,
}

impl LaggedDesign {
    /// Column of variable `v` at lag `l` (1-based).
    pub fn column(&self, v: usize, l: usize) -> usize {
        1 + (l - 1) * self.n_vars + v
    }

    pub fn rows(&self) -> usize {
        self.x.nrows()
    }

    /// Builds the design from fully observed data.
    pub fn build(data: &LongitudinalDataset, lag: usize) -> Result<Self> {
        if lag < 1 {
            return Err(Error::Config("lag must be at least 1".into()));
        }
        let k = data.n_vars();
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        let mut owner = Vec::new();
        for (i, ind) in data.individuals().iter().enumerate() {
            if ind.observed_count() != ind.n_timepoints() * k {
                return Err(Error::Data(format!(
                    "individual `{}` has missing cells; interpolate first",
                    ind.id()
                )));
            }
            let vals = ind.raw_values();
            for t in lag..ind.n_timepoints() {
                xs.push(1.0);
                for l in 1..=lag {
                    xs.extend_from_slice(&vals[(t - l) * k..(t - l + 1) * k]);
                }
                ys.extend_from_slice(&vals[t * k..(t + 1) * k]);
                owner.push(i);
            }
        }
        let n = owner.len();
        let cols = 1 + k * lag;
        Ok(Self {
            n_vars: k,
            lag,
            x: DMatrix::from_row_slice(n, cols, &xs),
            y: DMatrix::from_row_slice(n, k, &ys),
            owner,
        })
    }

    /// Least squares of target `v` on the listed columns; returns the
    /// coefficients in column order and the residual sum of squares.
    pub fn regress(&self, cols: &[usize], v: usize) -> Result<(Vec<f64>, f64)> {
        let xs = self.x.select_columns(cols);
        let y = self.y.column(v);
        let gram = xs.tr_mul(&xs);
        let rhs = xs.tr_mul(&y);
        let chol = match Cholesky::new(gram.clone()) {
            Some(c) => c,
            None => {
                warn!("singular design for target {v}; adding ridge {RIDGE_JITTER:e}");
                let jittered = gram + DMatrix::identity(cols.len(), cols.len()) * RIDGE_JITTER;
                Cholesky::new(jittered).ok_or_else(|| Error::Data("design matrix is not usable".into()))?
            }
        };
        let beta: DVector<f64> = chol.solve(&rhs);
        let resid = y - &xs * &beta;
        Ok((beta.iter().copied().collect(), resid.norm_squared()))
    }
}

/// Fitted vector autoregression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarModel {
    pub lag: usize,
    pub variable_names: Vec<String>,
    pub intercept: Vec<f64>,
    /// `coefficients[l][target][source]` for lag `l + 1`.
    pub coefficients: Vec<Vec<Vec<f64>>>,
    /// Residual variance per target (RSS over residual degrees of freedom).
    pub residual_variance: Vec<f64>,
}

/// Fits the full multivariate model on fully observed data.
pub fn fit_var(data: &LongitudinalDataset, lag: usize) -> Result<VarModel> {
    let design = LaggedDesign::build(data, lag)?;
    let k = design.n_vars;
    let all: Vec<usize> = (0..design.x.ncols()).collect();
    let dof = design.rows() as f64 - all.len() as f64;
    let mut intercept = vec![0.0; k];
    let mut coefficients = vec![vec![vec![0.0; k]; k]; lag];
    let mut residual_variance = vec![f64::NAN; k];
    for v in 0..k {
        let (beta, rss) = design.regress(&all, v)?;
        intercept[v] = beta[0];
        for (l, lag_coef) in coefficients.iter_mut().enumerate() {
            for u in 0..k {
                lag_coef[v][u] = beta[design.column(u, l + 1)];
            }
        }
        if dof > 0.0 {
            residual_variance[v] = rss / dof;
        }
    }
    if coefficients.iter().flatten().flatten().any(|c| !c.is_finite()) {
        return Err(Error::Data("non-finite autoregressive coefficients".into()));
    }
    Ok(VarModel {
        lag,
        variable_names: data.variable_names().to_vec(),
        intercept,
        coefficients,
        residual_variance,
    })
}

/// F-test of one ordered pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairTest {
    pub cause: usize,
    pub effect: usize,
    pub rss_full: f64,
    pub rss_restricted: f64,
    pub df1: usize,
    pub df2: usize,
    pub f: f64,
    pub p: f64,
}

#[derive(Debug, Clone)]
pub struct LinearGcResult {
    /// Edges with `p < alpha`, scored by their F-statistic.
    pub graph: CausalGraph,
    pub tests: Vec<PairTest>,
}

fn f_test(rss_full: f64, rss_restricted: f64, df1: usize, df2: usize) -> (f64, f64) {
    if df2 == 0 {
        return (f64::NAN, f64::NAN);
    }
    let num = (rss_restricted - rss_full).max(0.0) / df1 as f64;
    let den = rss_full / df2 as f64;
    if den <= 0.0 {
        return if num > 0.0 { (f64::INFINITY, 0.0) } else { (0.0, 1.0) };
    }
    let f = num / den;
    let dist = FisherSnedecor::new(df1 as f64, df2 as f64).expect("positive degrees of freedom");
    (f, dist.sf(f))
}

/// Tests every ordered pair on fully observed data.
pub fn fit_and_test(data: &LongitudinalDataset, cfg: &LinearGcConfig) -> Result<LinearGcResult> {
    cfg.validate()?;
    let design = LaggedDesign::build(data, cfg.lag)?;
    let k = design.n_vars;
    let p = cfg.lag;
    let lags_of = |vars: &[usize]| -> Vec<usize> {
        let mut cols = vec![0];
        for l in 1..=p {
            cols.extend(vars.iter().map(|&v| design.column(v, l)));
        }
        cols
    };
    let mut graph = CausalGraph::new(data.variable_names().to_vec());
    let mut tests = Vec::new();
    for effect in 0..k {
        let full_multi = match cfg.conditioning {
            Conditioning::Multivariate => {
                let cols = lags_of(&(0..k).collect::<Vec<_>>());
                Some((cols.len(), design.regress(&cols, effect)?.1))
            }
            Conditioning::Bivariate => None,
        };
        for cause in (0..k).filter(|&u| u != effect) {
            let (n_full, rss_full, restricted) = match full_multi {
                Some((n_full, rss)) => {
                    let keep: Vec<usize> = (0..k).filter(|&u| u != cause).collect();
                    (n_full, rss, lags_of(&keep))
                }
                None => {
                    let cols = lags_of(&[effect, cause]);
                    let rss = design.regress(&cols, effect)?.1;
                    (cols.len(), rss, lags_of(&[effect]))
                }
            };
            let rss_restricted = design.regress(&restricted, effect)?.1;
            let df2 = design.rows().saturating_sub(n_full);
            let (f, pv) = f_test(rss_full, rss_restricted, p, df2);
            if pv < cfg.alpha {
                graph.add_edge(cause, effect, f)?;
            }
            tests.push(PairTest {
                cause,
                effect,
                rss_full,
                rss_restricted,
                df1: p,
                df2,
                f,
                p: pv,
            });
        }
    }
    Ok(LinearGcResult { graph, tests })
}

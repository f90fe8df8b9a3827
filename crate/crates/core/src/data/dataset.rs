use std::collections::{BTreeMap, HashSet};

use crate::error::{Error, Result};

/// Free-form provenance record (seed, generator parameters, digests).
pub type Meta = BTreeMap<String, serde_json::Value>;

/// One individual's sparse trajectory.
///
/// Values are stored row-major as `[timepoint][variable]`. Cells that are not
/// observed hold `NaN`; read them only through the mask.
#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    id: String,
    times: Vec<f64>,
    n_vars: usize,
    values: Vec<f64>,
    observed: Vec<bool>,
}

impl Individual {
    /// Builds an individual from row-major `values` and `observed` of shape
    /// `times.len() x n_vars`. Unobserved cells are overwritten with the
    /// sentinel regardless of what was passed in.
    pub fn new(
        id: impl Into<String>,
        times: Vec<f64>,
        n_vars: usize,
        mut values: Vec<f64>,
        observed: Vec<bool>,
    ) -> Result<Self> {
        let id = id.into();
        if times.is_empty() {
            return Err(Error::Data(format!("individual `{id}` has no timepoints")));
        }
        let cells = times.len() * n_vars;
        if values.len() != cells || observed.len() != cells {
            return Err(Error::Data(format!(
                "individual `{id}`: expected {cells} cells, got {} values and {} mask entries",
                values.len(),
                observed.len()
            )));
        }
        if let Some(w) = times
            .windows(2)
            .find(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less))
        {
            return Err(Error::Data(format!(
                "individual `{id}`: times not strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        for (v, &o) in values.iter_mut().zip(&observed) {
            if !o {
                *v = f64::NAN;
            } else if !v.is_finite() {
                return Err(Error::Data(format!("individual `{id}`: non-finite observed value")));
            }
        }
        Ok(Self {
            id,
            times,
            n_vars,
            values,
            observed,
        })
    }

    /// Fully observed individual from a list of rows.
    pub fn from_rows(id: impl Into<String>, times: Vec<f64>, rows: &[Vec<f64>]) -> Result<Self> {
        let n_vars = rows.first().map_or(0, Vec::len);
        let values: Vec<f64> = rows.iter().flatten().copied().collect();
        let observed = vec![true; values.len()];
        Self::new(id, times, n_vars, values, observed)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn n_timepoints(&self) -> usize {
        self.times.len()
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    #[inline]
    pub fn is_observed(&self, t: usize, v: usize) -> bool {
        self.observed[t * self.n_vars + v]
    }

    /// The observed value at `(t, v)`, or `None` for a missing cell.
    #[inline]
    pub fn value(&self, t: usize, v: usize) -> Option<f64> {
        let i = t * self.n_vars + v;
        self.observed[i].then(|| self.values[i])
    }

    /// Raw row-major storage. Unobserved cells are `NaN`.
    pub fn raw_values(&self) -> &[f64] {
        &self.values
    }

    pub fn mask(&self) -> &[bool] {
        &self.observed
    }

    pub fn observed_count(&self) -> usize {
        self.observed.iter().filter(|&&o| o).count()
    }

    /// Returns a copy with every observed cell passed through `f(var, value)`.
    pub fn map_observed(&self, mut f: impl FnMut(usize, f64) -> f64) -> Self {
        let mut out = self.clone();
        for (i, (v, &o)) in out.values.iter_mut().zip(&self.observed).enumerate() {
            if o {
                *v = f(i % self.n_vars, *v);
            }
        }
        out
    }

    /// Returns a copy where cells with `drop(t, v) == true` become unobserved.
    pub fn with_dropped(&self, mut drop: impl FnMut(usize, usize) -> bool) -> Self {
        let mut out = self.clone();
        for t in 0..self.n_timepoints() {
            for v in 0..self.n_vars {
                let i = t * self.n_vars + v;
                if out.observed[i] && drop(t, v) {
                    out.observed[i] = false;
                    out.values[i] = f64::NAN;
                }
            }
        }
        out
    }
}

/// Many individuals observed on a shared, ordered list of variables.
#[derive(Debug, Clone, PartialEq)]
pub struct LongitudinalDataset {
    individuals: Vec<Individual>,
    variable_names: Vec<String>,
    pub meta: Meta,
}

impl LongitudinalDataset {
    pub fn new(variable_names: Vec<String>, individuals: Vec<Individual>) -> Result<Self> {
        let k = variable_names.len();
        if k == 0 {
            return Err(Error::Data("dataset has no variables".into()));
        }
        let mut seen_vars = HashSet::new();
        for name in &variable_names {
            if !seen_vars.insert(name.as_str()) {
                return Err(Error::Data(format!("duplicate variable name `{name}`")));
            }
        }
        let mut seen = HashSet::new();
        for ind in &individuals {
            if ind.n_vars != k {
                return Err(Error::Data(format!(
                    "individual `{}` has {} variables, dataset has {k}",
                    ind.id, ind.n_vars
                )));
            }
            if !seen.insert(ind.id.as_str()) {
                return Err(Error::Data(format!("duplicate individual id `{}`", ind.id)));
            }
        }
        Ok(Self {
            individuals,
            variable_names,
            meta: Meta::new(),
        })
    }

    pub fn with_meta(mut self, meta: Meta) -> Self {
        self.meta = meta;
        self
    }

    pub fn individuals(&self) -> &[Individual] {
        &self.individuals
    }

    pub fn variable_names(&self) -> &[String] {
        &self.variable_names
    }

    pub fn n_vars(&self) -> usize {
        self.variable_names.len()
    }

    pub fn len(&self) -> usize {
        self.individuals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.individuals.is_empty()
    }

    pub fn var_index(&self, name: &str) -> Result<usize> {
        self.variable_names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn ids(&self) -> Vec<String> {
        self.individuals.iter().map(|i| i.id.clone()).collect()
    }

    /// Sub-dataset holding the individuals at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            individuals: indices.iter().map(|&i| self.individuals[i].clone()).collect(),
            variable_names: self.variable_names.clone(),
            meta: self.meta.clone(),
        }
    }

    /// Applies `f` to every individual, keeping variables and metadata.
    pub fn map_individuals(&self, f: impl FnMut(&Individual) -> Individual) -> Self {
        Self {
            individuals: self.individuals.iter().map(f).collect(),
            variable_names: self.variable_names.clone(),
            meta: self.meta.clone(),
        }
    }

    pub fn total_cells(&self) -> usize {
        self.individuals.iter().map(|i| i.values.len()).sum()
    }

    pub fn observed_cells(&self) -> usize {
        self.individuals.iter().map(Individual::observed_count).sum()
    }
}

//! Batched forward pass and backpropagation through time for the gated
//! recurrent forecaster.
//!
//! At step `t` the input row for each cell is the observed value when the cell
//! is observed and not withheld, otherwise the model's own forecast for that
//! cell emitted at step `t-1` (zero at `t = 0`). The output at step `t` is the
//! forecast for timepoint `t+1`.

use ndarray::linalg::general_mat_mul;
use ndarray::{s, Array2, Axis};
use serde::{Deserialize, Serialize};

use super::params::{Block, GruParams};
use crate::data::Individual;

/// How unavailable inputs (missing or withheld) are filled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImputeMode {
    /// Feed back the model's previous forecast of the cell.
    #[default]
    SelfPredict,
    /// Feed zero (the standardized mean).
    Zero,
}

/// Step-major batch of sequences padded to a common length.
#[derive(Debug, Clone)]
pub struct SeqBatch {
    pub size: usize,
    pub steps: usize,
    pub n_vars: usize,
    /// `[t][b][v]`, zero where not observed.
    values: Vec<f64>,
    /// Cell observed (and within the sequence).
    observed: Vec<bool>,
    /// Cell fed from data: observed and not withheld.
    feed: Vec<bool>,
}

impl SeqBatch {
    /// `withheld[v]` marks variables removed from the input of that sequence.
    pub fn new<'a>(seqs: impl IntoIterator<Item = (&'a Individual, &'a [bool])>) -> Self {
        let seqs: Vec<_> = seqs.into_iter().collect();
        let size = seqs.len();
        let n_vars = seqs.first().map_or(0, |(i, _)| i.n_vars());
        let steps = seqs.iter().map(|(i, _)| i.n_timepoints()).max().unwrap_or(0);
        let cells = steps * size * n_vars;
        let mut values = vec![0.0; cells];
        let mut observed = vec![false; cells];
        let mut feed = vec![false; cells];
        for (b, (ind, withheld)) in seqs.iter().enumerate() {
            debug_assert_eq!(ind.n_vars(), n_vars);
            for t in 0..ind.n_timepoints() {
                for v in 0..n_vars {
                    if let Some(x) = ind.value(t, v) {
                        let i = (t * size + b) * n_vars + v;
                        values[i] = x;
                        observed[i] = true;
                        feed[i] = !withheld[v];
                    }
                }
            }
        }
        Self {
            size,
            steps,
            n_vars,
            values,
            observed,
            feed,
        }
    }

    #[inline]
    fn idx(&self, t: usize, b: usize, v: usize) -> usize {
        (t * self.size + b) * self.n_vars + v
    }

    /// Observed target at `(t, b, v)`.
    #[inline]
    pub fn target(&self, t: usize, b: usize, v: usize) -> Option<f64> {
        let i = self.idx(t, b, v);
        self.observed[i].then(|| self.values[i])
    }

    /// Number of observed target cells at `t >= 1`.
    pub fn target_count(&self) -> usize {
        if self.steps < 2 {
            return 0;
        }
        let from = self.size * self.n_vars;
        self.observed[from..].iter().filter(|&&o| o).count()
    }
}

struct StepCache {
    x: Array2<f64>,
    h_prev: Array2<f64>,
    r: Array2<f64>,
    z: Array2<f64>,
    n: Array2<f64>,
    ghn: Array2<f64>,
    h: Array2<f64>,
    pred: Array2<f64>,
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn assemble_input(batch: &SeqBatch, t: usize, prev_pred: Option<&Array2<f64>>, mode: ImputeMode) -> Array2<f64> {
    let (bsz, k) = (batch.size, batch.n_vars);
    let mut x = Array2::<f64>::zeros((bsz, k));
    let xs = x.as_slice_mut().unwrap();
    let base = t * bsz * k;
    for (i, xi) in xs.iter_mut().enumerate() {
        if batch.feed[base + i] {
            *xi = batch.values[base + i];
        } else if let (ImputeMode::SelfPredict, Some(p)) = (mode, prev_pred) {
            *xi = p.as_slice().unwrap()[i];
        }
    }
    x
}

fn step(params: &GruParams, x: Array2<f64>, h_prev: Array2<f64>) -> StepCache {
    let hsz = params.hidden;
    let bsz = x.nrows();
    let mut gi = Array2::<f64>::zeros((bsz, 3 * hsz));
    gi += &params.vec(Block::InputBias);
    general_mat_mul(1.0, &x, &params.mat(Block::InputWeights), 1.0, &mut gi);
    let mut gh = Array2::<f64>::zeros((bsz, 3 * hsz));
    gh += &params.vec(Block::HiddenBias);
    general_mat_mul(1.0, &h_prev, &params.mat(Block::HiddenWeights), 1.0, &mut gh);

    let mut r = Array2::<f64>::zeros((bsz, hsz));
    let mut z = Array2::<f64>::zeros((bsz, hsz));
    let mut n = Array2::<f64>::zeros((bsz, hsz));
    let mut ghn = Array2::<f64>::zeros((bsz, hsz));
    let mut h = Array2::<f64>::zeros((bsz, hsz));
    {
        let (gi, gh, hp) = (
            gi.as_slice().unwrap(),
            gh.as_slice().unwrap(),
            h_prev.as_slice().unwrap(),
        );
        let (rs, zs, ns) = (
            r.as_slice_mut().unwrap(),
            z.as_slice_mut().unwrap(),
            n.as_slice_mut().unwrap(),
        );
        let (ghns, hs) = (ghn.as_slice_mut().unwrap(), h.as_slice_mut().unwrap());
        for b in 0..bsz {
            let g = b * 3 * hsz;
            let o = b * hsz;
            for j in 0..hsz {
                let rj = sigmoid(gi[g + j] + gh[g + j]);
                let zj = sigmoid(gi[g + hsz + j] + gh[g + hsz + j]);
                let ghnj = gh[g + 2 * hsz + j];
                let nj = (gi[g + 2 * hsz + j] + rj * ghnj).tanh();
                rs[o + j] = rj;
                zs[o + j] = zj;
                ns[o + j] = nj;
                ghns[o + j] = ghnj;
                hs[o + j] = (1.0 - zj) * nj + zj * hp[o + j];
            }
        }
    }
    let mut pred = if params.residual {
        x.clone()
    } else {
        Array2::<f64>::zeros((bsz, params.n_vars))
    };
    pred += &params.vec(Block::OutputBias);
    general_mat_mul(1.0, &h, &params.mat(Block::OutputWeights), 1.0, &mut pred);
    StepCache {
        x,
        h_prev,
        r,
        z,
        n,
        ghn,
        h,
        pred,
    }
}

fn run(params: &GruParams, batch: &SeqBatch, mode: ImputeMode, steps: usize) -> Vec<StepCache> {
    assert_eq!(params.n_vars, batch.n_vars, "variable-count mismatch");
    let mut caches: Vec<StepCache> = Vec::with_capacity(steps);
    let mut h = Array2::<f64>::zeros((batch.size, params.hidden));
    for t in 0..steps {
        let x = assemble_input(batch, t, caches.last().map(|c| &c.pred), mode);
        let c = step(params, x, h);
        h = c.h.clone();
        caches.push(c);
    }
    caches
}

/// Forecasts for every step: element `t` is the `size x n_vars` forecast of timepoint `t+1`.
pub fn predict(params: &GruParams, batch: &SeqBatch, mode: ImputeMode) -> Vec<Array2<f64>> {
    run(params, batch, mode, batch.steps)
        .into_iter()
        .map(|c| c.pred)
        .collect()
}

/// Sum of squared errors over observed targets at `t >= 1`, and the target count.
pub fn loss_sum(params: &GruParams, batch: &SeqBatch, mode: ImputeMode) -> (f64, usize) {
    if batch.steps < 2 {
        return (0.0, 0);
    }
    let caches = run(params, batch, mode, batch.steps - 1);
    let mut sse = 0.0;
    let mut count = 0;
    for (t, c) in caches.iter().enumerate() {
        for b in 0..batch.size {
            for v in 0..batch.n_vars {
                if let Some(y) = batch.target(t + 1, b, v) {
                    sse += (c.pred[[b, v]] - y).powi(2);
                    count += 1;
                }
            }
        }
    }
    (sse, count)
}

/// Mean squared next-step error over observed targets and its gradient,
/// written into `grad` (same layout as `params.data`). Returns `None` when the
/// batch has no observed targets.
pub fn loss_and_grad(params: &GruParams, batch: &SeqBatch, mode: ImputeMode, grad: &mut GruParams) -> Option<f64> {
    grad.data.iter_mut().for_each(|g| *g = 0.0);
    let count = batch.target_count();
    if count == 0 {
        return None;
    }
    let steps = batch.steps - 1;
    let caches = run(params, batch, mode, steps);
    let (bsz, k, hsz) = (batch.size, batch.n_vars, params.hidden);
    let scale = 1.0 / count as f64;

    // d loss / d pred[t], including contributions routed back through
    // self-imputed inputs of step t+1.
    let mut dpred: Vec<Array2<f64>> = Vec::with_capacity(steps);
    let mut sse = 0.0;
    for (t, c) in caches.iter().enumerate() {
        let mut d = Array2::<f64>::zeros((bsz, k));
        for b in 0..bsz {
            for v in 0..k {
                if let Some(y) = batch.target(t + 1, b, v) {
                    let e = c.pred[[b, v]] - y;
                    sse += e * e;
                    d[[b, v]] = 2.0 * e * scale;
                }
            }
        }
        dpred.push(d);
    }

    let w_in = params.mat(Block::InputWeights).to_owned();
    let w_hid = params.mat(Block::HiddenWeights).to_owned();
    let w_out = params.mat(Block::OutputWeights).to_owned();
    let mut g_w_in = Array2::<f64>::zeros((k, 3 * hsz));
    let mut g_w_hid = Array2::<f64>::zeros((hsz, 3 * hsz));
    let mut g_w_out = Array2::<f64>::zeros((hsz, k));
    let mut g_b_in = ndarray::Array1::<f64>::zeros(3 * hsz);
    let mut g_b_hid = ndarray::Array1::<f64>::zeros(3 * hsz);
    let mut g_b_out = ndarray::Array1::<f64>::zeros(k);

    let mut dh_next = Array2::<f64>::zeros((bsz, hsz));
    let mut dgi = Array2::<f64>::zeros((bsz, 3 * hsz));
    let mut dgh = Array2::<f64>::zeros((bsz, 3 * hsz));
    for t in (0..steps).rev() {
        let c = &caches[t];
        let dy = &dpred[t];
        general_mat_mul(1.0, &c.h.t(), dy, 1.0, &mut g_w_out);
        g_b_out += &dy.sum_axis(Axis(0));
        let mut dh = dh_next;
        general_mat_mul(1.0, dy, &w_out.t(), 1.0, &mut dh);

        let mut dh_prev = Array2::<f64>::zeros((bsz, hsz));
        {
            let dhs = dh.as_slice().unwrap();
            let (rs, zs, ns) = (
                c.r.as_slice().unwrap(),
                c.z.as_slice().unwrap(),
                c.n.as_slice().unwrap(),
            );
            let (ghn, hp) = (c.ghn.as_slice().unwrap(), c.h_prev.as_slice().unwrap());
            let (dgis, dghs) = (dgi.as_slice_mut().unwrap(), dgh.as_slice_mut().unwrap());
            let dhp = dh_prev.as_slice_mut().unwrap();
            for b in 0..bsz {
                let o = b * hsz;
                let g = b * 3 * hsz;
                for j in 0..hsz {
                    let (r, z, n) = (rs[o + j], zs[o + j], ns[o + j]);
                    let d = dhs[o + j];
                    let dz_pre = d * (hp[o + j] - n) * z * (1.0 - z);
                    let dn_pre = d * (1.0 - z) * (1.0 - n * n);
                    let dr_pre = dn_pre * ghn[o + j] * r * (1.0 - r);
                    dgis[g + j] = dr_pre;
                    dgis[g + hsz + j] = dz_pre;
                    dgis[g + 2 * hsz + j] = dn_pre;
                    dghs[g + j] = dr_pre;
                    dghs[g + hsz + j] = dz_pre;
                    dghs[g + 2 * hsz + j] = dn_pre * r;
                    dhp[o + j] = d * z;
                }
            }
        }
        general_mat_mul(1.0, &c.x.t(), &dgi, 1.0, &mut g_w_in);
        g_b_in += &dgi.sum_axis(Axis(0));
        general_mat_mul(1.0, &c.h_prev.t(), &dgh, 1.0, &mut g_w_hid);
        g_b_hid += &dgh.sum_axis(Axis(0));
        general_mat_mul(1.0, &dgh, &w_hid.t(), 1.0, &mut dh_prev);

        if t > 0 && mode == ImputeMode::SelfPredict {
            let base = t * bsz * k;
            if batch.feed[base..base + bsz * k].iter().any(|f| !f) {
                let mut dx = if params.residual {
                    dy.clone()
                } else {
                    Array2::<f64>::zeros((bsz, k))
                };
                general_mat_mul(1.0, &dgi, &w_in.t(), 1.0, &mut dx);
                let (prev, _) = dpred.split_at_mut(t);
                let dprev = prev[t - 1].as_slice_mut().unwrap();
                let dxs = dx.as_slice().unwrap();
                for i in 0..bsz * k {
                    if !batch.feed[base + i] {
                        dprev[i] += dxs[i];
                    }
                }
            }
        }
        dh_next = dh_prev;
    }

    grad.mat_mut(Block::InputWeights).assign(&g_w_in);
    grad.mat_mut(Block::HiddenWeights).assign(&g_w_hid);
    grad.mat_mut(Block::OutputWeights).assign(&g_w_out);
    grad.vec_mut(Block::InputBias).assign(&g_b_in);
    grad.vec_mut(Block::HiddenBias).assign(&g_b_hid);
    grad.vec_mut(Block::OutputBias).assign(&g_b_out);
    Some(sse * scale)
}

/// Forecasts for a single sequence as a `timepoints x n_vars` matrix.
pub fn predict_one(params: &GruParams, ind: &Individual, withheld: &[bool], mode: ImputeMode) -> Array2<f64> {
    let batch = SeqBatch::new([(ind, withheld)]);
    let preds = predict(params, &batch, mode);
    let mut out = Array2::<f64>::zeros((batch.steps, batch.n_vars));
    for (t, p) in preds.iter().enumerate() {
        out.slice_mut(s![t, ..]).assign(&p.row(0));
    }
    out
}

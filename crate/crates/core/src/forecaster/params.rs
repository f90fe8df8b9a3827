use ndarray::{ArrayView1, ArrayView2, ArrayViewMut1, ArrayViewMut2};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Named parameter blocks, in storage order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Block {
    /// Input to gates, `n_vars x 3*hidden`, gate order reset/update/candidate.
    InputWeights,
    /// Hidden to gates, `hidden x 3*hidden`.
    HiddenWeights,
    InputBias,
    HiddenBias,
    /// Hidden to next-step prediction, `hidden x n_vars`.
    OutputWeights,
    OutputBias,
}

impl Block {
    pub const ALL: [Block; 6] = [
        Block::InputWeights,
        Block::HiddenWeights,
        Block::InputBias,
        Block::HiddenBias,
        Block::OutputWeights,
        Block::OutputBias,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Block::InputWeights => "input_weights",
            Block::HiddenWeights => "hidden_weights",
            Block::InputBias => "input_bias",
            Block::HiddenBias => "hidden_bias",
            Block::OutputWeights => "output_weights",
            Block::OutputBias => "output_bias",
        }
    }
}

/// Gated recurrent cell parameters stored in one flat buffer, so the
/// optimizer, checkpointing and finite-difference checks can treat them as a
/// single vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GruParams {
    pub n_vars: usize,
    pub hidden: usize,
    /// Forecast is the step's input plus the output layer, rather than the
    /// output layer alone.
    #[serde(default)]
    pub residual: bool,
    pub data: Vec<f64>,
}

impl GruParams {
    pub fn len_for(n_vars: usize, hidden: usize) -> usize {
        let g = 3 * hidden;
        n_vars * g + hidden * g + 2 * g + hidden * n_vars + n_vars
    }

    pub fn zeros(n_vars: usize, hidden: usize) -> Self {
        Self {
            n_vars,
            hidden,
            residual: false,
            data: vec![0.0; Self::len_for(n_vars, hidden)],
        }
    }

    /// Uniform on `[-1/sqrt(hidden), 1/sqrt(hidden)]` for every block.
    pub fn init(n_vars: usize, hidden: usize, rng: &mut impl Rng) -> Self {
        let mut p = Self::zeros(n_vars, hidden);
        let bound = 1.0 / (hidden as f64).sqrt();
        for x in &mut p.data {
            *x = rng.random_range(-bound..bound);
        }
        p
    }

    /// Offset and length of a block within `data`.
    pub fn range(&self, block: Block) -> std::ops::Range<usize> {
        let (k, h) = (self.n_vars, self.hidden);
        let g = 3 * h;
        let sizes = [k * g, h * g, g, g, h * k, k];
        let idx = Block::ALL.iter().position(|&b| b == block).unwrap();
        let start: usize = sizes[..idx].iter().sum();
        start..start + sizes[idx]
    }

    fn shape2(&self, block: Block) -> (usize, usize) {
        let (k, h) = (self.n_vars, self.hidden);
        match block {
            Block::InputWeights => (k, 3 * h),
            Block::HiddenWeights => (h, 3 * h),
            Block::OutputWeights => (h, k),
            _ => panic!("{} is not a matrix block", block.name()),
        }
    }

    pub fn mat(&self, block: Block) -> ArrayView2<'_, f64> {
        let r = self.range(block);
        ArrayView2::from_shape(self.shape2(block), &self.data[r]).unwrap()
    }

    pub fn mat_mut(&mut self, block: Block) -> ArrayViewMut2<'_, f64> {
        let r = self.range(block);
        let shape = self.shape2(block);
        ArrayViewMut2::from_shape(shape, &mut self.data[r]).unwrap()
    }

    pub fn vec(&self, block: Block) -> ArrayView1<'_, f64> {
        let r = self.range(block);
        ArrayView1::from(&self.data[r])
    }

    pub fn vec_mut(&mut self, block: Block) -> ArrayViewMut1<'_, f64> {
        let r = self.range(block);
        ArrayViewMut1::from(&mut self.data[r])
    }

    pub fn with_residual(mut self, residual: bool) -> Self {
        self.residual = residual;
        self
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

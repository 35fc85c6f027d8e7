//! Coordinate-queried MLP decoder (a fixed-topology CPPN).
//!
//! The network maps `(dx, dy, dz, d)` for every cell of a box to an output
//! vector: `out[0]` decides air vs matter, the next `N` entries pick the block
//! type from the palette and, optionally, the last six pick the orientation.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::block::{Block, BlockType};
use crate::geom::{Cube, Orientation, Position};

pub const HIDDEN: usize = 20;
pub const INPUTS: usize = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MlpError {
    #[error("expected {expected} inputs, got {got}")]
    InputArity { expected: usize, got: usize },
    #[error("expected {expected} parameters, got {got}")]
    ParamCount { expected: usize, got: usize },
    #[error("palette must not be empty")]
    EmptyPalette,
    #[error("top-k must be at least 1")]
    ZeroTopK,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ActivationSet {
    /// Rectifier hidden layers.
    #[default]
    Default,
    /// Hidden neuron `i` uses `[sin, gaussian, tanh, cos][i % 4]`.
    Cppn,
}

impl ActivationSet {
    pub fn name(self) -> &'static str {
        match self {
            ActivationSet::Default => "default",
            ActivationSet::Cppn => "cppn",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "default" => Some(ActivationSet::Default),
            "cppn" => Some(ActivationSet::Cppn),
            _ => None,
        }
    }

    fn hidden(self, i: usize, x: f64) -> f64 {
        match self {
            ActivationSet::Default => x.max(0.0),
            ActivationSet::Cppn => match i % 4 {
                0 => x.sin(),
                1 => (-x * x).exp(),
                2 => x.tanh(),
                _ => x.cos(),
            },
        }
    }
}

pub fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MlpConfig {
    pub palette: Vec<BlockType>,
    pub with_orientation: bool,
    pub symmetrize: bool,
    pub activation: ActivationSet,
}

impl MlpConfig {
    pub fn new(palette: Vec<BlockType>) -> Self {
        MlpConfig { palette, with_orientation: false, symmetrize: false, activation: ActivationSet::Default }
    }

    pub fn n_types(&self) -> usize {
        self.palette.len()
    }

    pub fn output_len(&self) -> usize {
        output_len(self.n_types(), self.with_orientation)
    }

    pub fn param_count(&self) -> usize {
        param_count(self.n_types(), self.with_orientation)
    }

    pub fn validate(&self) -> Result<(), MlpError> {
        if self.palette.is_empty() {
            return Err(MlpError::EmptyPalette);
        }
        Ok(())
    }
}

pub fn output_len(n_types: usize, with_orientation: bool) -> usize {
    n_types + if with_orientation { 7 } else { 1 }
}

/// Weights and biases of the three linear layers.
pub fn param_count(n_types: usize, with_orientation: bool) -> usize {
    let out = output_len(n_types, with_orientation);
    (INPUTS * HIDDEN + HIDDEN) + (HIDDEN * HIDDEN + HIDDEN) + (HIDDEN * out + out)
}

/// A flat parameter vector laid out as `W1, b1, W2, b2, W3, b3`, each weight
/// matrix row-major with one row per output neuron.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MlpGenome {
    pub theta: Vec<f64>,
    pub config: MlpConfig,
}

/// Axis-aligned region the network is queried on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodeBox {
    pub base: Position,
    pub extent: [i32; 3],
}

impl DecodeBox {
    pub fn new(base: Position, extent: [i32; 3]) -> Self {
        assert!(extent.iter().all(|&e| e >= 1), "decode box extent must be positive");
        DecodeBox { base, extent }
    }

    pub fn cube(&self) -> Cube {
        Cube::with_extent(self.base, self.extent[0], self.extent[1], self.extent[2])
    }

    pub fn volume(&self) -> usize {
        self.extent.iter().map(|&e| e as usize).product()
    }
}

fn dense(w: &[f64], b: &[f64], x: &[f64], out: &mut [f64]) {
    let n_in = x.len();
    for (j, o) in out.iter_mut().enumerate() {
        let row = &w[j * n_in..(j + 1) * n_in];
        *o = b[j] + row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
    }
}

/// Cell index `i` of an axis with `n` cells mapped to `[-1, 1]`; a single cell maps to 0.
pub fn normalize_coord(i: i32, n: i32) -> f64 {
    if n <= 1 {
        return 0.0;
    }
    let half = f64::from(n - 1) / 2.0;
    (f64::from(i) - half) / half
}

impl MlpGenome {
    pub fn new(theta: Vec<f64>, config: MlpConfig) -> Result<Self, MlpError> {
        config.validate()?;
        let expected = config.param_count();
        if theta.len() != expected {
            return Err(MlpError::ParamCount { expected, got: theta.len() });
        }
        Ok(MlpGenome { theta, config })
    }

    pub fn zeros(config: MlpConfig) -> Self {
        let n = config.param_count();
        MlpGenome { theta: vec![0.0; n], config }
    }

    /// Evaluates the network on `(dx, dy, dz, d)`.
    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>, MlpError> {
        if input.len() != INPUTS {
            return Err(MlpError::InputArity { expected: INPUTS, got: input.len() });
        }
        let out_len = self.config.output_len();
        let act = self.config.activation;
        let t = &self.theta;
        let (w1, rest) = t.split_at(INPUTS * HIDDEN);
        let (b1, rest) = rest.split_at(HIDDEN);
        let (w2, rest) = rest.split_at(HIDDEN * HIDDEN);
        let (b2, rest) = rest.split_at(HIDDEN);
        let (w3, b3) = rest.split_at(HIDDEN * out_len);

        let mut h1 = [0.0; HIDDEN];
        dense(w1, b1, input, &mut h1);
        for (i, v) in h1.iter_mut().enumerate() {
            *v = act.hidden(i, *v);
        }
        let mut h2 = [0.0; HIDDEN];
        dense(w2, b2, &h1, &mut h2);
        for (i, v) in h2.iter_mut().enumerate() {
            *v = act.hidden(i, *v);
        }
        let mut out = vec![0.0; out_len];
        dense(w3, b3, &h2, &mut out);
        for v in &mut out {
            *v = logistic(*v);
        }
        Ok(out)
    }

    /// Network input for cell offset `(i, j, k)` of a box with `extent`.
    pub fn input_for(&self, ijk: [i32; 3], extent: [i32; 3]) -> [f64; 4] {
        let mut c = [0.0; 3];
        for a in 0..3 {
            c[a] = normalize_coord(ijk[a], extent[a]);
            if self.config.symmetrize {
                c[a] = c[a].abs();
            }
        }
        let d = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt() / 3f64.sqrt();
        [c[0], c[1], c[2], d]
    }

    /// Deterministic decode: argmax type and orientation, lowest index on ties.
    pub fn decode_box(&self, bx: DecodeBox) -> Vec<Block> {
        self.decode_with(bx, argmax)
    }

    /// Stochastic decode: the type is drawn among the `k` highest type scores
    /// with probability proportional to the score. `k = 1` equals [`decode_box`](Self::decode_box).
    pub fn decode_box_top_k<R: Rng + ?Sized>(&self, bx: DecodeBox, k: usize, rng: &mut R) -> Result<Vec<Block>, MlpError> {
        if k == 0 {
            return Err(MlpError::ZeroTopK);
        }
        if k == 1 {
            return Ok(self.decode_box(bx));
        }
        Ok(self.decode_with(bx, |scores| {
            let mut idx: Vec<usize> = (0..scores.len()).collect();
            idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
            idx.truncate(k);
            let total: f64 = idx.iter().map(|&i| scores[i]).sum();
            let mut u = rng.random::<f64>() * total;
            for &i in &idx {
                u -= scores[i];
                if u < 0.0 {
                    return i;
                }
            }
            idx[idx.len() - 1]
        }))
    }

    fn decode_with(&self, bx: DecodeBox, mut pick_type: impl FnMut(&[f64]) -> usize) -> Vec<Block> {
        let n = self.config.n_types();
        let mut blocks = Vec::new();
        for i in 0..bx.extent[0] {
            for j in 0..bx.extent[1] {
                for k in 0..bx.extent[2] {
                    let input = self.input_for([i, j, k], bx.extent);
                    let out = self.forward(&input).expect("input arity is fixed");
                    if out[0] <= 0.5 {
                        continue;
                    }
                    let kind = self.config.palette[pick_type(&out[1..=n])];
                    let orientation =
                        if self.config.with_orientation { Orientation::ALL[argmax(&out[n + 1..n + 7])] } else { Orientation::North };
                    blocks.push(Block::new(bx.base + Position::new(i, j, k), kind, orientation));
                }
            }
        }
        blocks
    }
}

/// Index of the largest value; the lowest index wins ties.
pub fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in xs.iter().enumerate().skip(1) {
        if *x > xs[best] {
            best = i;
        }
    }
    best
}

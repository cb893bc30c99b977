//! Interpretable retrofitting of node embeddings.
//!
//! A single-layer sigmoid autoencoder maps each `D`-dim input vector into
//! `[0,1]^K`. Besides reconstruction error, two regularizers act on the
//! per-dimension graph masks `m_d(u,v) = h_d(u)h_d(v)/K`: an orthogonality
//! loss on the node-aggregated mask matrix `P` and an entropy loss on the
//! mask sizes `s_d`. The hidden matrix `H` is the retrofitted embedding.

mod grad;
mod loss;
mod theorem;

use std::fmt::Write as _;
use std::path::Path;

use ndarray::{Array1, Array2};
use rand::Rng;
use serde::{Deserialize, Serialize};

pub use grad::{gradient_check, gradients, Gradients};
pub use loss::{
    evaluate, forward, loss_ac, loss_orth, loss_size, mask_mass, mask_sizes, partition_matrix,
    Forward, LossBreakdown, LossTerms,
};
pub use theorem::{theorem_residual, TheoremResidual};

use crate::embed::EmbeddingMatrix;
use crate::error::{Error, Result};
use crate::rng::{stream_rng, Stream};

/// Encoder `(W0: K×D, b0: K)` and decoder `(W1: D×K, b1: D)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AutoencoderParams {
    pub w0: Array2<f64>,
    pub b0: Array1<f64>,
    pub w1: Array2<f64>,
    pub b1: Array1<f64>,
}

impl AutoencoderParams {
    pub fn zeros(input_dim: usize, hidden_dim: usize) -> Self {
        Self {
            w0: Array2::zeros((hidden_dim, input_dim)),
            b0: Array1::zeros(hidden_dim),
            w1: Array2::zeros((input_dim, hidden_dim)),
            b1: Array1::zeros(input_dim),
        }
    }

    /// Weights uniform in `±sqrt(6/(D+K))`, biases zero.
    pub fn init(input_dim: usize, hidden_dim: usize, seed: u64) -> Self {
        let mut rng = stream_rng(seed, Stream::Init);
        let bound = (6.0 / (input_dim + hidden_dim) as f64).sqrt();
        let mut draw = |shape: (usize, usize)| {
            Array2::from_shape_simple_fn(shape, || rng.random_range(-bound..bound))
        };
        let w0 = draw((hidden_dim, input_dim));
        let w1 = draw((input_dim, hidden_dim));
        Self {
            w0,
            b0: Array1::zeros(hidden_dim),
            w1,
            b1: Array1::zeros(input_dim),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.w0.ncols()
    }

    pub fn hidden_dim(&self) -> usize {
        self.w0.nrows()
    }

    pub(crate) fn check_input(&self, x: &Array2<f64>) -> Result<()> {
        let (k, d) = self.w0.dim();
        let consistent = self.b0.len() == k && self.w1.dim() == (d, k) && self.b1.len() == d;
        if !consistent {
            return Err(Error::ShapeMismatch(
                "inconsistent autoencoder parameter shapes".into(),
            ));
        }
        if x.nrows() != d {
            return Err(Error::ShapeMismatch(format!(
                "input has {} dimensions, encoder expects {d}",
                x.nrows()
            )));
        }
        Ok(())
    }

    fn tensors_mut(&mut self) -> [&mut [f64]; 4] {
        [
            self.w0.as_slice_mut().expect("standard layout"),
            self.b0.as_slice_mut().expect("standard layout"),
            self.w1.as_slice_mut().expect("standard layout"),
            self.b1.as_slice_mut().expect("standard layout"),
        ]
    }
}

impl Gradients {
    fn tensors(&self) -> [&[f64]; 4] {
        [
            self.w0.as_slice().expect("standard layout"),
            self.b0.as_slice().expect("standard layout"),
            self.w1.as_slice().expect("standard layout"),
            self.b1.as_slice().expect("standard layout"),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Optimizer {
    Sgd,
    Adam,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RetrofitConfig {
    pub hidden_dim: usize,
    pub iterations: usize,
    pub learning_rate: f64,
    pub optimizer: Optimizer,
    pub use_orth: bool,
    pub use_size: bool,
    pub seed: u64,
}

impl Default for RetrofitConfig {
    fn default() -> Self {
        Self {
            hidden_dim: 128,
            iterations: 2000,
            learning_rate: 0.1,
            optimizer: Optimizer::Adam,
            use_orth: true,
            use_size: true,
            seed: 0,
        }
    }
}

impl RetrofitConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden_dim < 2 {
            return Err(Error::InvalidParameter(format!(
                "hidden dimension must be at least 2, got {}",
                self.hidden_dim
            )));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        Ok(())
    }

    pub fn terms(&self) -> LossTerms {
        LossTerms {
            ac: true,
            orth: self.use_orth,
            size: self.use_size,
        }
    }
}

struct Adam {
    first: Vec<Vec<f64>>,
    second: Vec<Vec<f64>>,
    step: i32,
}

impl Adam {
    const BETA1: f64 = 0.9;
    const BETA2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn new(params: &AutoencoderParams) -> Self {
        let sizes = [
            params.w0.len(),
            params.b0.len(),
            params.w1.len(),
            params.b1.len(),
        ];
        Self {
            first: sizes.iter().map(|&n| vec![0.0; n]).collect(),
            second: sizes.iter().map(|&n| vec![0.0; n]).collect(),
            step: 0,
        }
    }

    fn update(&mut self, params: &mut AutoencoderParams, grads: &Gradients, lr: f64) {
        self.step += 1;
        let c1 = 1.0 - Self::BETA1.powi(self.step);
        let c2 = 1.0 - Self::BETA2.powi(self.step);
        for (t, (p, g)) in params
            .tensors_mut()
            .into_iter()
            .zip(grads.tensors())
            .enumerate()
        {
            let (m, v) = (&mut self.first[t], &mut self.second[t]);
            for (i, (pi, gi)) in p.iter_mut().zip(g.iter()).enumerate() {
                m[i] = Self::BETA1 * m[i] + (1.0 - Self::BETA1) * gi;
                v[i] = Self::BETA2 * v[i] + (1.0 - Self::BETA2) * gi * gi;
                let m_hat = m[i] / c1;
                let v_hat = v[i] / c2;
                *pi -= lr * m_hat / (v_hat.sqrt() + Self::EPS);
            }
        }
    }
}

fn sgd_update(params: &mut AutoencoderParams, grads: &Gradients, lr: f64) {
    for (p, g) in params.tensors_mut().into_iter().zip(grads.tensors()) {
        for (pi, gi) in p.iter_mut().zip(g) {
            *pi -= lr * gi;
        }
    }
}

#[derive(Debug, Clone)]
pub struct RetrofitOutcome {
    pub params: AutoencoderParams,
    /// `K × |V|` hidden matrix with the input's node ids.
    pub embedding: EmbeddingMatrix,
    /// Loss before the first update and after each of the `iterations` updates.
    pub trace: Vec<LossBreakdown>,
}

/// Full-batch training from a seeded initialization.
pub fn train(x: &EmbeddingMatrix, cfg: &RetrofitConfig) -> Result<RetrofitOutcome> {
    cfg.validate()?;
    let params = AutoencoderParams::init(x.dims(), cfg.hidden_dim, cfg.seed);
    train_from(x, params, cfg)
}

/// Full-batch training from given parameters.
pub fn train_from(
    x: &EmbeddingMatrix,
    mut params: AutoencoderParams,
    cfg: &RetrofitConfig,
) -> Result<RetrofitOutcome> {
    cfg.validate()?;
    let input = x.values();
    params.check_input(input)?;
    let terms = cfg.terms();
    let mut adam = Adam::new(&params);
    let mut trace = Vec::with_capacity(cfg.iterations + 1);

    for iteration in 0..cfg.iterations {
        let (loss, grads) = gradients(&params, input, terms)?;
        trace.push(loss);
        if !loss.is_finite() {
            return Err(Error::Diverged { iteration, trace });
        }
        match cfg.optimizer {
            Optimizer::Sgd => sgd_update(&mut params, &grads, cfg.learning_rate),
            Optimizer::Adam => adam.update(&mut params, &grads, cfg.learning_rate),
        }
    }
    let fwd = forward(&params, input)?;
    let last = loss::breakdown(input, &fwd, terms)?;
    trace.push(last);
    if !last.is_finite() {
        return Err(Error::Diverged {
            iteration: cfg.iterations,
            trace,
        });
    }
    let embedding = EmbeddingMatrix::new(fwd.hidden, x.node_ids().to_vec())?;
    Ok(RetrofitOutcome {
        params,
        embedding,
        trace,
    })
}

/// CSV with header `iter,l_ac,l_orth,l_size,total`.
pub fn format_trace(trace: &[LossBreakdown]) -> String {
    let mut out = String::from("iter,l_ac,l_orth,l_size,total\n");
    for (i, l) in trace.iter().enumerate() {
        let _ = writeln!(out, "{i},{},{},{},{}", l.l_ac, l.l_orth, l.l_size, l.total);
    }
    out
}

pub fn write_trace(trace: &[LossBreakdown], path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, format_trace(trace))?;
    Ok(())
}

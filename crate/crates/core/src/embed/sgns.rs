//! Skip-gram with negative sampling over node walks.

use ndarray::Array2;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::EmbeddingMatrix;
use crate::error::{Error, Result};
use crate::rng::{stream_rng, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SgnsConfig {
    pub dim: usize,
    pub epochs: usize,
    pub negatives: usize,
    pub initial_lr: f64,
    pub min_lr: f64,
    pub seed: u64,
}

impl Default for SgnsConfig {
    fn default() -> Self {
        Self {
            dim: 128,
            epochs: 5,
            negatives: 5,
            initial_lr: 0.025,
            min_lr: 1e-4,
            seed: 0,
        }
    }
}

impl SgnsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidParameter("dim must be at least 1".into()));
        }
        if !(self.min_lr > 0.0 && self.min_lr <= self.initial_lr) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < min_lr <= initial_lr, got {} and {}",
                self.min_lr, self.initial_lr
            )));
        }
        Ok(())
    }
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Input (center) and output (context) vectors, both stored node-major.
#[derive(Debug, Clone)]
pub struct SgnsModel {
    dim: usize,
    num_nodes: usize,
    input: Vec<f64>,
    output: Vec<f64>,
    noise: WeightedIndex<f64>,
    window: usize,
    cfg: SgnsConfig,
    rng: ChaCha8Rng,
    total_steps: usize,
    steps_done: usize,
}

/// Fixed `(center, context, negatives)` triples for loss monitoring.
#[derive(Debug, Clone)]
pub struct ProbeBatch {
    triples: Vec<(usize, usize, Vec<usize>)>,
}

impl SgnsModel {
    /// Input vectors uniform in `±0.5/D`, output vectors zero, noise
    /// distribution proportional to walk frequency^0.75.
    pub fn new(
        walks: &[Vec<usize>],
        num_nodes: usize,
        window: usize,
        cfg: &SgnsConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        if walks.iter().all(Vec::is_empty) {
            return Err(Error::InvalidParameter("no walks to train on".into()));
        }
        if cfg.dim >= num_nodes {
            log::warn!(
                "embedding dimension {} >= number of nodes {num_nodes}",
                cfg.dim
            );
        }
        let mut counts = vec![0u64; num_nodes];
        for &v in walks.iter().flatten() {
            if v >= num_nodes {
                return Err(Error::ShapeMismatch(format!(
                    "walk visits node {v} but only {num_nodes} nodes exist"
                )));
            }
            counts[v] += 1;
        }
        let weights: Vec<f64> = counts.iter().map(|&c| (c as f64).powf(0.75)).collect();
        let noise = WeightedIndex::new(&weights)
            .map_err(|e| Error::InvalidParameter(format!("noise distribution: {e}")))?;

        let mut rng = stream_rng(cfg.seed, Stream::Sgns);
        let half = 0.5 / cfg.dim as f64;
        let input = (0..num_nodes * cfg.dim)
            .map(|_| rng.random_range(-half..half))
            .collect();
        let positions: usize = walks.iter().map(Vec::len).sum();
        Ok(Self {
            dim: cfg.dim,
            num_nodes,
            input,
            output: vec![0.0; num_nodes * cfg.dim],
            noise,
            window,
            cfg: *cfg,
            rng,
            total_steps: positions * cfg.epochs,
            steps_done: 0,
        })
    }

    fn input_row(&self, v: usize) -> &[f64] {
        &self.input[v * self.dim..(v + 1) * self.dim]
    }

    fn output_row(&self, v: usize) -> &[f64] {
        &self.output[v * self.dim..(v + 1) * self.dim]
    }

    fn learning_rate(&self) -> f64 {
        if self.total_steps == 0 {
            return self.cfg.initial_lr;
        }
        let progress = self.steps_done as f64 / self.total_steps as f64;
        (self.cfg.initial_lr - (self.cfg.initial_lr - self.cfg.min_lr) * progress)
            .max(self.cfg.min_lr)
    }

    /// One pass over the corpus: every ordered pair within `window`
    /// positions is a positive example for the center node.
    pub fn train_epoch(&mut self, walks: &[Vec<usize>]) {
        let dim = self.dim;
        let mut grad = vec![0.0; dim];
        for walk in walks {
            for (i, &center) in walk.iter().enumerate() {
                let lr = self.learning_rate();
                self.steps_done += 1;
                let lo = i.saturating_sub(self.window);
                let hi = (i + self.window + 1).min(walk.len());
                for (j, &context) in walk.iter().enumerate().take(hi).skip(lo) {
                    if j == i {
                        continue;
                    }
                    grad.iter_mut().for_each(|g| *g = 0.0);
                    for k in 0..=self.cfg.negatives {
                        let (target, label) = if k == 0 {
                            (context, 1.0)
                        } else {
                            let t = self.noise.sample(&mut self.rng);
                            if t == context {
                                continue;
                            }
                            (t, 0.0)
                        };
                        let c = center * dim;
                        let t = target * dim;
                        let f = dot(&self.input[c..c + dim], &self.output[t..t + dim]);
                        let g = (label - sigmoid(f)) * lr;
                        let out = &mut self.output[t..t + dim];
                        let inp = &self.input[c..c + dim];
                        for ((gq, oq), iq) in grad.iter_mut().zip(out.iter_mut()).zip(inp) {
                            *gq += g * *oq;
                            *oq += g * iq;
                        }
                    }
                    let c = center * dim;
                    for (iq, gq) in self.input[c..c + dim].iter_mut().zip(&grad) {
                        *iq += gq;
                    }
                }
            }
        }
    }

    /// Draws `size` positive pairs from the walks with their negatives,
    /// using a stream independent of training.
    pub fn probe_batch(&self, walks: &[Vec<usize>], size: usize, seed: u64) -> ProbeBatch {
        let mut rng = stream_rng(seed, Stream::Sgns);
        rng.set_word_pos(1 << 40);
        let usable: Vec<&Vec<usize>> = walks.iter().filter(|w| w.len() > 1).collect();
        let mut triples = Vec::with_capacity(size);
        if usable.is_empty() {
            return ProbeBatch { triples };
        }
        while triples.len() < size {
            let w = usable[rng.random_range(0..usable.len())];
            let i = rng.random_range(0..w.len());
            let lo = i.saturating_sub(self.window);
            let hi = (i + self.window).min(w.len() - 1);
            let j = rng.random_range(lo..=hi);
            if i == j {
                continue;
            }
            let negs = (0..self.cfg.negatives)
                .map(|_| self.noise.sample(&mut rng))
                .collect();
            triples.push((w[i], w[j], negs));
        }
        ProbeBatch { triples }
    }

    /// Mean negative SGNS log-likelihood over the batch.
    pub fn probe_loss(&self, batch: &ProbeBatch) -> f64 {
        let total: f64 = batch
            .triples
            .iter()
            .map(|(c, ctx, negs)| {
                let u = self.input_row(*c);
                let pos = -sigmoid(dot(u, self.output_row(*ctx))).ln();
                let neg: f64 = negs
                    .iter()
                    .map(|&n| -sigmoid(-dot(u, self.output_row(n))).ln())
                    .sum();
                pos + neg
            })
            .sum();
        total / batch.triples.len().max(1) as f64
    }

    /// Input-side vectors as a `D × |V|` matrix.
    pub fn embedding(&self) -> Result<EmbeddingMatrix> {
        let values = Array2::from_shape_fn((self.dim, self.num_nodes), |(d, v)| {
            self.input[v * self.dim + d]
        });
        EmbeddingMatrix::from_values(values)
    }
}

/// Sequential, deterministic SGNS training; returns the input vectors.
pub fn train_sgns(
    walks: &[Vec<usize>],
    num_nodes: usize,
    window: usize,
    cfg: &SgnsConfig,
) -> Result<EmbeddingMatrix> {
    let mut model = SgnsModel::new(walks, num_nodes, window, cfg)?;
    for _ in 0..cfg.epochs {
        model.train_epoch(walks);
    }
    model.embedding()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::{sample_walks, WalkConfig};
    use crate::graph::Graph;
    use crate::sbm::{generate_sbm, SbmConfig};

    fn cliques(k: usize, size: usize) -> Graph {
        let mut edges = Vec::new();
        for b in 0..k {
            for i in 0..size {
                for j in (i + 1)..size {
                    edges.push((b * size + i, b * size + j));
                }
            }
        }
        Graph::from_edges(k * size, edges).unwrap()
    }

    #[test]
    fn zero_epochs_returns_initialization() {
        let g = cliques(2, 5);
        let walks = sample_walks(&g, &WalkConfig::default()).unwrap();
        let cfg = SgnsConfig {
            dim: 4,
            epochs: 0,
            ..SgnsConfig::default()
        };
        let model = SgnsModel::new(&walks, 10, 5, &cfg).unwrap();
        let x = train_sgns(&walks, 10, 5, &cfg).unwrap();
        assert_eq!(x, model.embedding().unwrap());
        let bound = 0.5 / 4.0;
        assert!(x.values().iter().all(|v| v.abs() <= bound));
    }

    #[test]
    fn intra_clique_dots_exceed_inter() {
        let g = cliques(2, 8);
        let walks = sample_walks(&g, &WalkConfig::default()).unwrap();
        let cfg = SgnsConfig {
            dim: 2,
            ..SgnsConfig::default()
        };
        let x = train_sgns(&walks, 16, 5, &cfg).unwrap();
        let (mut intra, mut ni, mut inter, mut nx) = (0.0, 0, 0.0, 0);
        for u in 0..16 {
            for v in (u + 1)..16 {
                let d = x.column(u).dot(&x.column(v));
                if u / 8 == v / 8 {
                    intra += d;
                    ni += 1;
                } else {
                    inter += d;
                    nx += 1;
                }
            }
        }
        assert!(intra / ni as f64 > inter / nx as f64);
    }

    #[test]
    fn first_epoch_lowers_probe_loss() {
        let (g, _) = generate_sbm(&SbmConfig::default()).unwrap();
        let walks = sample_walks(&g, &WalkConfig::default()).unwrap();
        let cfg = SgnsConfig {
            dim: 8,
            ..SgnsConfig::default()
        };
        let mut model = SgnsModel::new(&walks, 80, 5, &cfg).unwrap();
        let batch = model.probe_batch(&walks, 2000, 99);
        let before = model.probe_loss(&batch);
        assert!((before - 6.0 * std::f64::consts::LN_2).abs() < 1e-12);
        model.train_epoch(&walks);
        assert!(model.probe_loss(&batch) < before);
    }

    #[test]
    fn deterministic_per_seed() {
        let g = cliques(3, 4);
        let walks = sample_walks(&g, &WalkConfig::default()).unwrap();
        let cfg = SgnsConfig {
            dim: 3,
            epochs: 2,
            seed: 5,
            ..SgnsConfig::default()
        };
        assert_eq!(
            train_sgns(&walks, 12, 5, &cfg).unwrap(),
            train_sgns(&walks, 12, 5, &cfg).unwrap()
        );
    }

    #[test]
    fn rejects_bad_learning_rates() {
        let cfg = SgnsConfig {
            min_lr: 0.5,
            ..SgnsConfig::default()
        };
        assert!(cfg.validate().is_err());
    }
}

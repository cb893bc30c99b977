//! Link-prediction evaluation: held-out pairs ranked by `Δ` and scored with
//! ROC-AUC.

use serde::{Deserialize, Serialize};

use crate::attribution::delta_full;
use crate::embed::EmbeddingMatrix;
use crate::error::{Error, Result};
use crate::graph::{Edge, Graph};
use crate::pipeline::EmbeddingMethod;
use crate::split::{split_edges, EdgeSplit};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredPair {
    pub u: usize,
    pub v: usize,
    pub score: f64,
    pub positive: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RankedPairs {
    pub pairs: Vec<ScoredPair>,
}

/// Scores every test pair with `Δ` over all dimensions.
pub fn score_pairs(x: &EmbeddingMatrix, split: &EdgeSplit) -> Result<RankedPairs> {
    let rows = x.node_major();
    let dims = x.dims();
    let n = x.num_nodes();
    let row = |v: usize| -> Result<&[f64]> {
        if v >= n {
            return Err(Error::MissingNode(v.to_string()));
        }
        Ok(&rows.as_slice().expect("standard layout")[v * dims..(v + 1) * dims])
    };
    let label = |edges: &[Edge], positive: bool| -> Result<Vec<ScoredPair>> {
        edges
            .iter()
            .map(|&(u, v)| {
                Ok(ScoredPair {
                    u,
                    v,
                    score: delta_full(row(u)?, row(v)?),
                    positive,
                })
            })
            .collect()
    };
    let mut pairs = label(&split.positive_test, true)?;
    pairs.extend(label(&split.negative_test, false)?);
    Ok(RankedPairs { pairs })
}

/// Mann–Whitney AUC: probability that a random positive outscores a random
/// negative, ties counting one half. Uses mid-ranks, `O(n log n)`.
pub fn roc_auc(r: &RankedPairs) -> Result<f64> {
    let positives = r.pairs.iter().filter(|p| p.positive).count();
    let negatives = r.pairs.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::SingleClass);
    }
    if r.pairs.iter().any(|p| !p.score.is_finite()) {
        return Err(Error::InvalidParameter("non-finite pair score".into()));
    }
    let mut order: Vec<&ScoredPair> = r.pairs.iter().collect();
    order.sort_by(|a, b| a.score.total_cmp(&b.score));

    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && order[j + 1].score == order[i].score {
            j += 1;
        }
        // ranks are 1-based; tied block shares the mean rank
        let mid = (i + j) as f64 / 2.0 + 1.0;
        rank_sum += mid * order[i..=j].iter().filter(|p| p.positive).count() as f64;
        i = j + 1;
    }
    let p = positives as f64;
    Ok((rank_sum - p * (p + 1.0) / 2.0) / (p * negatives as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeedAuc {
    pub seed: u64,
    pub auc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkPredSummary {
    pub method: String,
    pub dims: usize,
    pub seeds: Vec<SeedAuc>,
    pub mean: f64,
    /// Sample standard deviation (0 for a single seed).
    pub std: f64,
}

/// One split, embedding and evaluation per seed; embeddings only ever see
/// the training graph.
pub fn linkpred_experiment(
    g: &Graph,
    method: &EmbeddingMethod,
    holdout_fraction: f64,
    seeds: &[u64],
) -> Result<LinkPredSummary> {
    if seeds.is_empty() {
        return Err(Error::InvalidParameter(
            "at least one seed is required".into(),
        ));
    }
    let mut results = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let split = split_edges(g, holdout_fraction, seed)?;
        let x = method.embed(&split.train_graph, seed)?;
        let auc = roc_auc(&score_pairs(&x, &split)?)?;
        log::info!("{} seed {seed}: AUC {auc:.4}", method.name());
        results.push(SeedAuc { seed, auc });
    }
    let (mean, std) = mean_std(&results.iter().map(|r| r.auc).collect::<Vec<_>>());
    Ok(LinkPredSummary {
        method: method.name().to_owned(),
        dims: method.output_dims(),
        seeds: results,
        mean,
        std,
    })
}

/// Mean and sample standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

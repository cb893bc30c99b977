//! Hold-out edge splits for link prediction.

use std::collections::HashSet;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{canonical, Edge, Graph};
use crate::rng::{stream_rng, Stream};

/// Training graph plus balanced positive/negative test pairs. The training
/// graph keeps the full node set of the source graph.
#[derive(Debug, Clone)]
pub struct EdgeSplit {
    pub train_graph: Graph,
    pub positive_test: Vec<Edge>,
    pub negative_test: Vec<Edge>,
    pub holdout_fraction: f64,
    pub seed: u64,
}

/// Moves `⌊fraction·|E|⌋` uniformly chosen edges into the positive test set
/// and samples as many distinct non-edges of the original graph as
/// negatives.
pub fn split_edges(g: &Graph, holdout_fraction: f64, seed: u64) -> Result<EdgeSplit> {
    if !(holdout_fraction > 0.0 && holdout_fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "holdout fraction {holdout_fraction} is not in (0, 1)"
        )));
    }
    let m = g.num_edges();
    let held = (holdout_fraction * m as f64 + 1e-9).floor() as usize;
    if held >= m {
        return Err(Error::InvalidParameter(
            "holdout would leave no training edges".into(),
        ));
    }
    if held == 0 {
        return Err(Error::InvalidParameter(format!(
            "holdout fraction {holdout_fraction} selects no test edges out of {m}"
        )));
    }
    let n = g.num_nodes();
    let non_edges = n * (n - 1) / 2 - m;
    if non_edges < held {
        return Err(Error::InvalidParameter(format!(
            "graph has only {non_edges} non-edges, {held} negatives requested"
        )));
    }

    let mut rng = stream_rng(seed, Stream::Split);
    let mut shuffled: Vec<Edge> = g.edges().to_vec();
    shuffled.shuffle(&mut rng);
    let mut positive_test = shuffled.split_off(m - held);
    positive_test.sort_unstable();
    let train_graph = g.with_edges(&shuffled)?;

    let mut chosen = HashSet::with_capacity(held);
    let mut negative_test = Vec::with_capacity(held);
    while negative_test.len() < held {
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        if u == v || g.has_edge(u, v) {
            continue;
        }
        let pair = canonical(u, v);
        if chosen.insert(pair) {
            negative_test.push(pair);
        }
    }

    Ok(EdgeSplit {
        train_graph,
        positive_test,
        negative_test,
        holdout_fraction,
        seed,
    })
}

/// On-disk form of a split; pairs are node indices of the source graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub holdout_fraction: f64,
    pub seed: u64,
    pub positive_test: Vec<[usize; 2]>,
    pub negative_test: Vec<[usize; 2]>,
}

impl From<&EdgeSplit> for SplitManifest {
    fn from(s: &EdgeSplit) -> Self {
        let pairs = |v: &[Edge]| v.iter().map(|&(a, b)| [a, b]).collect();
        Self {
            holdout_fraction: s.holdout_fraction,
            seed: s.seed,
            positive_test: pairs(&s.positive_test),
            negative_test: pairs(&s.negative_test),
        }
    }
}

impl SplitManifest {
    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    /// Rebuilds the split against the graph it was drawn from.
    pub fn to_split(&self, g: &Graph) -> Result<EdgeSplit> {
        let to_edges =
            |v: &[[usize; 2]]| -> Vec<Edge> { v.iter().map(|&[a, b]| canonical(a, b)).collect() };
        let positive_test = to_edges(&self.positive_test);
        let held: HashSet<Edge> = positive_test.iter().copied().collect();
        let train: Vec<Edge> = g
            .edges()
            .iter()
            .copied()
            .filter(|e| !held.contains(e))
            .collect();
        Ok(EdgeSplit {
            train_graph: g.with_edges(&train)?,
            positive_test,
            negative_test: to_edges(&self.negative_test),
            holdout_fraction: self.holdout_fraction,
            seed: self.seed,
        })
    }
}

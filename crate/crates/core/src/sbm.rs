//! Stochastic block model generator.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{CommunityAssignment, Graph};
use crate::rng::{stream_rng, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SbmConfig {
    pub num_blocks: usize,
    pub block_size: usize,
    pub intra_prob: f64,
    pub inter_prob: f64,
    pub seed: u64,
}

impl Default for SbmConfig {
    /// Eight disjoint 10-cliques.
    fn default() -> Self {
        Self {
            num_blocks: 8,
            block_size: 10,
            intra_prob: 1.0,
            inter_prob: 0.0,
            seed: 0,
        }
    }
}

impl SbmConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("intra_prob", self.intra_prob),
            ("inter_prob", self.inter_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidParameter(format!(
                    "{name} = {p} is not in [0, 1]"
                )));
            }
        }
        if self.num_blocks == 0 || self.block_size == 0 {
            return Err(Error::InvalidParameter(
                "num_blocks and block_size must be at least 1".into(),
            ));
        }
        Ok(())
    }

    pub fn num_nodes(&self) -> usize {
        self.num_blocks * self.block_size
    }
}

/// Samples every node pair independently; node `v` belongs to block
/// `v / block_size`.
pub fn generate_sbm(cfg: &SbmConfig) -> Result<(Graph, CommunityAssignment)> {
    cfg.validate()?;
    let n = cfg.num_nodes();
    let block = |v: usize| v / cfg.block_size;
    let mut rng = stream_rng(cfg.seed, Stream::Sbm);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            let p = if block(u) == block(v) {
                cfg.intra_prob
            } else {
                cfg.inter_prob
            };
            if rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    let graph = Graph::from_edges(n, edges)?;
    let blocks: Vec<usize> = (0..n).map(block).collect();
    Ok((graph, CommunityAssignment::from_labels(&blocks)))
}

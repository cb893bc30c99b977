use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng::{stream_rng, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkConfig {
    /// Nodes per walk, start node included.
    pub walk_length: usize,
    pub num_walks: usize,
    pub window: usize,
    pub seed: u64,
}

impl Default for WalkConfig {
    fn default() -> Self {
        Self {
            walk_length: 10,
            num_walks: 20,
            window: 5,
            seed: 0,
        }
    }
}

impl WalkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.walk_length == 0 || self.num_walks == 0 || self.window == 0 {
            return Err(Error::InvalidParameter(
                "walk_length, num_walks and window must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// `num_walks` rounds; each round visits every node once in a freshly
/// shuffled order and starts one uniform random walk there. Walks stop
/// early only at isolated nodes.
pub fn sample_walks(g: &Graph, cfg: &WalkConfig) -> Result<Vec<Vec<usize>>> {
    cfg.validate()?;
    let mut rng = stream_rng(cfg.seed, Stream::Walks);
    let mut starts: Vec<usize> = (0..g.num_nodes()).collect();
    let mut walks = Vec::with_capacity(cfg.num_walks * g.num_nodes());
    for _ in 0..cfg.num_walks {
        starts.shuffle(&mut rng);
        for &start in &starts {
            let mut walk = Vec::with_capacity(cfg.walk_length);
            walk.push(start);
            let mut cur = start;
            while walk.len() < cfg.walk_length {
                let nbrs = g.neighbors(cur);
                if nbrs.is_empty() {
                    break;
                }
                cur = nbrs[rng.random_range(0..nbrs.len())];
                walk.push(cur);
            }
            walks.push(walk);
        }
    }
    Ok(walks)
}

//! Embedding methods shared by experiments and the command line.

use serde::{Deserialize, Serialize};

use crate::embed::{deepwalk, EmbeddingMatrix, SgnsConfig, WalkConfig};
use crate::error::Result;
use crate::graph::Graph;
use crate::retrofit::{self, RetrofitConfig};

/// How to produce an embedding for a graph. Seeds inside the configs are
/// replaced by the run seed; each stage draws from its own substream.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum EmbeddingMethod {
    DeepWalk {
        walks: WalkConfig,
        sgns: SgnsConfig,
    },
    Dine {
        walks: WalkConfig,
        sgns: SgnsConfig,
        retrofit: RetrofitConfig,
    },
}

impl EmbeddingMethod {
    pub fn name(&self) -> &'static str {
        match self {
            EmbeddingMethod::DeepWalk { .. } => "deepwalk",
            EmbeddingMethod::Dine { .. } => "dine",
        }
    }

    pub fn output_dims(&self) -> usize {
        match self {
            EmbeddingMethod::DeepWalk { sgns, .. } => sgns.dim,
            EmbeddingMethod::Dine { retrofit, .. } => retrofit.hidden_dim,
        }
    }

    pub fn embed(&self, g: &Graph, seed: u64) -> Result<EmbeddingMatrix> {
        match *self {
            EmbeddingMethod::DeepWalk { walks, sgns } => deepwalk(
                g,
                &WalkConfig { seed, ..walks },
                &SgnsConfig { seed, ..sgns },
            ),
            EmbeddingMethod::Dine {
                walks,
                sgns,
                retrofit,
            } => {
                let x = deepwalk(
                    g,
                    &WalkConfig { seed, ..walks },
                    &SgnsConfig { seed, ..sgns },
                )?;
                let out = retrofit::train(&x, &RetrofitConfig { seed, ..retrofit })?;
                Ok(out.embedding)
            }
        }
    }
}

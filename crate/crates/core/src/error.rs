use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("graph has no edges")]
    EmptyGraph,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("dimension subset is empty")]
    EmptySubset,

    #[error("marginal utility needs at least 2 dimensions, got {0}")]
    TooFewDimensions(usize),

    #[error(
        "exact Shapley enumeration is limited to {limit} dimensions (got {dims}); \
         use marginal utility instead"
    )]
    ShapleyTooLarge { dims: usize, limit: usize },

    #[error("node `{0}` is missing from the embedding")]
    MissingNode(String),

    #[error("all mask sizes are zero")]
    DegenerateSizes,

    #[error("training diverged at iteration {iteration} (non-finite loss)")]
    Diverged {
        iteration: usize,
        trace: Vec<crate::retrofit::LossBreakdown>,
    },

    #[error("ROC-AUC needs at least one positive and one negative pair")]
    SingleClass,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

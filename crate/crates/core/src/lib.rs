//! Dimension-level interpretability for node embeddings.
//!
//! * [`attribution`] scores how much each embedding dimension contributes to
//!   reconstructing each edge and extracts per-dimension explanation
//!   subgraphs.
//! * [`metrics`] rates those subgraphs for community match and sparsity.
//! * [`retrofit`] trains a regularized autoencoder that maps an existing
//!   embedding into a more interpretable `[0,1]^K` space.
//! * [`graph`], [`sbm`], [`louvain`], [`split`], [`embed`] and [`linkpred`]
//!   provide the data handling, baseline embeddings and evaluation protocol.

pub mod attribution;
pub mod embed;
pub mod error;
pub mod graph;
pub mod linkpred;
pub mod louvain;
pub mod metrics;
pub mod pipeline;
pub mod retrofit;
pub mod rng;
pub mod sbm;
pub mod split;

pub use error::{Error, Result};

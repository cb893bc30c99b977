//! Per-dimension attribution of edge reconstruction scores.
//!
//! The edge score over a dimension subset `S` is the mean coordinate product
//! `Δ_S(u, v) = (1/|S|) Σ_{d∈S} u_d v_d`. A dimension's marginal utility is
//! the drop in `Δ` when it is removed from the full set; the exact Shapley
//! value averages that drop over every coalition of the other dimensions.
//! Dimensions are numbered from 0.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embed::EmbeddingMatrix;
use crate::error::{Error, Result};
use crate::graph::{Edge, Graph};

/// Largest dimension count accepted by [`shapley_exact`].
pub const SHAPLEY_MAX_DIMS: usize = 20;

/// `Δ_S`: mean of `u_d v_d` over `subset`, summed in the given order.
pub fn delta_score(u: &[f64], v: &[f64], subset: &[usize]) -> Result<f64> {
    if subset.is_empty() {
        return Err(Error::EmptySubset);
    }
    check_pair(u, v)?;
    let sum = subset.iter().fold(0.0, |acc, &d| acc + u[d] * v[d]);
    Ok(sum / subset.len() as f64)
}

/// `Δ` over every dimension.
pub fn delta_full(u: &[f64], v: &[f64]) -> f64 {
    let sum = u.iter().zip(v).fold(0.0, |acc, (a, b)| acc + a * b);
    sum / u.len() as f64
}

fn check_pair(u: &[f64], v: &[f64]) -> Result<()> {
    if u.len() != v.len() {
        return Err(Error::ShapeMismatch(format!(
            "vectors of length {} and {}",
            u.len(),
            v.len()
        )));
    }
    Ok(())
}

/// Closed form `μ_d = (D·u_d v_d − S) / (D(D−1))`, `S = Σ_q u_q v_q`.
pub fn marginal_utility(u: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    let mut out = vec![0.0; u.len()];
    marginal_utility_into(u, v, &mut out)?;
    Ok(out)
}

fn marginal_utility_into(u: &[f64], v: &[f64], out: &mut [f64]) -> Result<()> {
    check_pair(u, v)?;
    let dims = u.len();
    if dims < 2 {
        return Err(Error::TooFewDimensions(dims));
    }
    let d = dims as f64;
    let total: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let denom = d * (d - 1.0);
    for ((o, a), b) in out.iter_mut().zip(u).zip(v) {
        *o = (d * a * b - total) / denom;
    }
    Ok(())
}

/// `μ_d = Δ_𝒟 − Δ_{𝒟∖{d}}` evaluated literally, each `Δ` summed in
/// ascending dimension order.
pub fn marginal_utility_definitional(u: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    check_pair(u, v)?;
    let dims = u.len();
    if dims < 2 {
        return Err(Error::TooFewDimensions(dims));
    }
    let all: Vec<usize> = (0..dims).collect();
    let full = delta_score(u, v, &all)?;
    (0..dims)
        .map(|d| {
            let rest: Vec<usize> = (0..dims).filter(|&q| q != d).collect();
            Ok(full - delta_score(u, v, &rest)?)
        })
        .collect()
}

/// Sum of products for every subset mask, each accumulated in ascending
/// dimension order so it matches [`delta_score`] bit for bit.
fn subset_sums(products: &[f64]) -> Vec<f64> {
    let dims = products.len();
    let mut sums = vec![0.0; 1 << dims];
    for mask in 1usize..(1 << dims) {
        let top = usize::BITS as usize - 1 - mask.leading_zeros() as usize;
        sums[mask] = sums[mask & !(1 << top)] + products[top];
    }
    sums
}

fn shapley_guard(u: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    check_pair(u, v)?;
    let dims = u.len();
    if dims > SHAPLEY_MAX_DIMS {
        return Err(Error::ShapleyTooLarge {
            dims,
            limit: SHAPLEY_MAX_DIMS,
        });
    }
    if dims == 0 {
        return Err(Error::TooFewDimensions(0));
    }
    Ok(u.iter().zip(v).map(|(a, b)| a * b).collect())
}

/// Mean marginal contribution `Δ_{S∪{d}} − Δ_S` of each dimension over all
/// coalitions `S ⊆ 𝒟∖{d}` of each size, indexed `[d][|S|]`, with
/// `Δ_∅ = 0`. The entry at `|S| = D−1` is the single full-coalition term.
pub fn shapley_terms_by_size(u: &[f64], v: &[f64]) -> Result<Vec<Vec<f64>>> {
    let products = shapley_guard(u, v)?;
    let dims = products.len();
    let sums = subset_sums(&products);
    let delta = |mask: usize| -> f64 {
        match mask.count_ones() {
            0 => 0.0,
            k => sums[mask] / k as f64,
        }
    };
    let mut out = vec![vec![0.0; dims]; dims];
    let mut counts = vec![0usize; dims];
    for (d, row) in out.iter_mut().enumerate() {
        counts.iter_mut().for_each(|c| *c = 0);
        let bit = 1usize << d;
        for mask in 0usize..(1 << dims) {
            if mask & bit != 0 {
                continue;
            }
            let size = mask.count_ones() as usize;
            row[size] += delta(mask | bit) - delta(mask);
            counts[size] += 1;
        }
        for (r, &c) in row.iter_mut().zip(&counts) {
            *r /= c as f64;
        }
    }
    Ok(out)
}

/// Exact Shapley values of the `Δ` game by coalition enumeration
/// (`Δ_∅ = 0`, so the values sum to `Δ_𝒟`).
pub fn shapley_exact(u: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    let terms = shapley_terms_by_size(u, v)?;
    let dims = terms.len() as f64;
    Ok(terms
        .into_iter()
        .map(|row| row.iter().sum::<f64>() / dims)
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoringKind {
    Marginal,
    Shapley,
}

/// Per-edge attribution vectors, one row of `D` values per graph edge in
/// the graph's canonical edge order.
#[derive(Debug, Clone, PartialEq)]
pub struct UtilityTable {
    dims: usize,
    kind: ScoringKind,
    edges: Vec<Edge>,
    labels: Vec<String>,
    values: Vec<f64>,
}

impl UtilityTable {
    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn kind(&self) -> ScoringKind {
        self.kind
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn row(&self, edge: usize) -> &[f64] {
        &self.values[edge * self.dims..(edge + 1) * self.dims]
    }

    pub fn get(&self, edge: usize, dim: usize) -> f64 {
        self.values[edge * self.dims + dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.dims)
    }
}

/// Attribution vectors for every edge of `g`, computed in parallel into
/// per-edge slots.
pub fn utility_table(g: &Graph, x: &EmbeddingMatrix, kind: ScoringKind) -> Result<UtilityTable> {
    if x.num_nodes() != g.num_nodes() {
        return Err(Error::ShapeMismatch(format!(
            "embedding has {} nodes, graph has {}",
            x.num_nodes(),
            g.num_nodes()
        )));
    }
    let dims = x.dims();
    match kind {
        ScoringKind::Marginal if dims < 2 => return Err(Error::TooFewDimensions(dims)),
        ScoringKind::Shapley if dims > SHAPLEY_MAX_DIMS => {
            return Err(Error::ShapleyTooLarge {
                dims,
                limit: SHAPLEY_MAX_DIMS,
            })
        }
        _ => {}
    }
    let rows = x.node_major();
    let rows = rows.as_slice().expect("standard layout");
    let node = |v: usize| &rows[v * dims..(v + 1) * dims];
    let edges = g.edges().to_vec();
    let mut values = vec![0.0; edges.len() * dims];
    values
        .par_chunks_mut(dims.max(1))
        .zip(edges.par_iter())
        .try_for_each(|(out, &(u, v))| -> Result<()> {
            match kind {
                ScoringKind::Marginal => marginal_utility_into(node(u), node(v), out),
                ScoringKind::Shapley => {
                    out.copy_from_slice(&shapley_exact(node(u), node(v))?);
                    Ok(())
                }
            }
        })?;
    Ok(UtilityTable {
        dims,
        kind,
        edges,
        labels: g.labels().to_vec(),
        values,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarity {
    /// `μ_d > 0`, the explanation proper.
    Positive,
    /// `μ_d < 0`; weights are stored as magnitudes.
    Negative,
}

/// Edges whose utility for `dim` has the requested sign.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplanationSubgraph {
    pub dim: usize,
    /// Positions in the source graph's edge list.
    pub edge_ids: Vec<usize>,
    pub edges: Vec<Edge>,
    /// Strictly positive weights, parallel to `edges`.
    pub weights: Vec<f64>,
}

impl ExplanationSubgraph {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Dimensions without any edge are kept but inactive.
    pub fn is_active(&self) -> bool {
        !self.edges.is_empty()
    }
}

/// `E_d = {(u,v) ∈ E : μ_d(u,v) > 0}` for every dimension.
pub fn explanation_subgraphs(t: &UtilityTable) -> Vec<ExplanationSubgraph> {
    signed_subgraphs(t, Polarity::Positive)
}

pub fn signed_subgraphs(t: &UtilityTable, polarity: Polarity) -> Vec<ExplanationSubgraph> {
    let mut out: Vec<ExplanationSubgraph> = (0..t.dims)
        .map(|dim| ExplanationSubgraph {
            dim,
            edge_ids: Vec::new(),
            edges: Vec::new(),
            weights: Vec::new(),
        })
        .collect();
    for (e, row) in t.rows().enumerate() {
        for (d, &mu) in row.iter().enumerate() {
            let w = match polarity {
                Polarity::Positive => mu,
                Polarity::Negative => -mu,
            };
            if w > 0.0 {
                out[d].edge_ids.push(e);
                out[d].edges.push(t.edges[e]);
                out[d].weights.push(w);
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SaliencyNormalization {
    /// Min-max over every `(dim, edge)` cell of the table.
    #[default]
    Global,
    /// Min-max within each dimension.
    PerDimension,
}

/// TSV with header `dim u v mu mu_norm`, rows ordered by dimension then
/// edge. A degenerate range normalizes to 0.
pub fn format_saliency(t: &UtilityTable, norm: SaliencyNormalization) -> String {
    let range = |vals: &mut dyn Iterator<Item = f64>| {
        vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
            (lo.min(x), hi.max(x))
        })
    };
    let global = range(&mut t.values.iter().copied());
    let mut out = String::from("dim\tu\tv\tmu\tmu_norm\n");
    for d in 0..t.dims {
        let (lo, hi) = match norm {
            SaliencyNormalization::Global => global,
            SaliencyNormalization::PerDimension => {
                range(&mut (0..t.num_edges()).map(|e| t.get(e, d)))
            }
        };
        for (e, &(u, v)) in t.edges.iter().enumerate() {
            let mu = t.get(e, d);
            let scaled = if hi > lo { (mu - lo) / (hi - lo) } else { 0.0 };
            let _ = writeln!(out, "{d}\t{}\t{}\t{mu}\t{scaled}", t.labels[u], t.labels[v]);
        }
    }
    out
}

pub fn export_saliency(
    t: &UtilityTable,
    path: impl AsRef<Path>,
    norm: SaliencyNormalization,
) -> Result<()> {
    std::fs::write(path, format_saliency(t, norm))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubgraphRecord {
    pub dim: usize,
    pub edges: Vec<(String, String, f64)>,
}

pub fn subgraph_records(
    t: &UtilityTable,
    subgraphs: &[ExplanationSubgraph],
) -> Vec<SubgraphRecord> {
    subgraphs
        .iter()
        .map(|s| SubgraphRecord {
            dim: s.dim,
            edges: s
                .edges
                .iter()
                .zip(&s.weights)
                .map(|(&(u, v), &w)| (t.labels[u].clone(), t.labels[v].clone(), w))
                .collect(),
        })
        .collect()
}

//! Interpretability scores for explanation subgraphs: community match (best
//! F1 against a ground-truth edge partition) and sparsity (normalized
//! entropy of the subgraph's edge indicator).

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::attribution::{explanation_subgraphs, utility_table, ExplanationSubgraph, ScoringKind};
use crate::embed::EmbeddingMatrix;
use crate::error::{Error, Result};
use crate::graph::{EdgePartition, Graph};

/// Precision and recall of `subgraph` against `part`, both given as edge
/// positions. An empty denominator yields 0.
pub fn precision_recall(subgraph: &[usize], part: &[usize]) -> (f64, f64) {
    let part_set: HashSet<usize> = part.iter().copied().collect();
    let hits = subgraph.iter().filter(|e| part_set.contains(e)).count() as f64;
    let ratio = |den: usize| if den == 0 { 0.0 } else { hits / den as f64 };
    (ratio(subgraph.len()), ratio(part.len()))
}

pub fn f1(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Best F1 over all parts and the part achieving it (lowest id on ties).
/// An empty subgraph scores `(0, None)`.
pub fn community_score(
    e_d: &ExplanationSubgraph,
    partition: &EdgePartition,
) -> (f64, Option<usize>) {
    if e_d.is_empty() {
        return (0.0, None);
    }
    let mut hits = vec![0usize; partition.num_parts()];
    for &e in &e_d.edge_ids {
        hits[partition.part_of_edge(e)] += 1;
    }
    let size = e_d.len() as f64;
    let mut best = (0.0, None);
    for (p, &h) in hits.iter().enumerate() {
        if h == 0 {
            continue;
        }
        let precision = h as f64 / size;
        let recall = h as f64 / partition.part_size(p) as f64;
        let score = f1(precision, recall);
        if best.1.is_none() || score > best.0 {
            best = (score, Some(p));
        }
    }
    best
}

/// `log z / log |E|` for a subgraph of `z` edges; 0 when empty.
pub fn sparsity_score(subgraph_size: usize, total_edges: usize) -> Result<f64> {
    if total_edges < 2 {
        return Err(Error::InvalidParameter(format!(
            "sparsity needs at least 2 edges, graph has {total_edges}"
        )));
    }
    if subgraph_size == 0 {
        return Ok(0.0);
    }
    Ok((subgraph_size as f64).ln() / (total_edges as f64).ln())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DimRanking {
    /// Largest explanation subgraph first.
    #[default]
    Coverage,
    /// Highest community score first.
    Score,
}

/// Greedy selection of dimensions until their subgraphs jointly cover
/// `threshold·|E|` edges. Inactive dimensions are never selected; if the
/// threshold is unreachable every active dimension is returned. Output is
/// in selection order.
pub fn effective_dimensions(
    subgraphs: &[ExplanationSubgraph],
    total_edges: usize,
    threshold: f64,
) -> Result<Vec<usize>> {
    let order = rank(subgraphs, |s| s.len() as f64);
    select_until_covered(subgraphs, &order, total_edges, threshold)
}

fn rank<F: Fn(&ExplanationSubgraph) -> f64>(
    subgraphs: &[ExplanationSubgraph],
    key: F,
) -> Vec<usize> {
    let mut order: Vec<usize> = (0..subgraphs.len())
        .filter(|&i| subgraphs[i].is_active())
        .collect();
    order.sort_by(|&a, &b| {
        key(&subgraphs[b])
            .total_cmp(&key(&subgraphs[a]))
            .then(subgraphs[a].dim.cmp(&subgraphs[b].dim))
    });
    order
}

fn select_until_covered(
    subgraphs: &[ExplanationSubgraph],
    order: &[usize],
    total_edges: usize,
    threshold: f64,
) -> Result<Vec<usize>> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "coverage threshold {threshold} is not in (0, 1]"
        )));
    }
    let target = threshold * total_edges as f64;
    let mut covered = HashSet::new();
    let mut chosen = Vec::new();
    for &i in order {
        chosen.push(subgraphs[i].dim);
        covered.extend(subgraphs[i].edge_ids.iter().copied());
        if covered.len() as f64 >= target {
            break;
        }
    }
    Ok(chosen)
}

fn coverage(subgraphs: &[ExplanationSubgraph], dims: &[usize], total_edges: usize) -> f64 {
    let covered: HashSet<usize> = dims
        .iter()
        .flat_map(|&d| subgraphs[d].edge_ids.iter().copied())
        .collect();
    covered.len() as f64 / total_edges as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionScore {
    pub dim: usize,
    pub i_com: f64,
    pub best_part: Option<usize>,
    pub i_sp: f64,
    pub size: usize,
}

impl DimensionScore {
    pub fn is_active(&self) -> bool {
        self.size > 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterpretabilityReport {
    pub dims: Vec<DimensionScore>,
    pub d_eff: Vec<usize>,
    pub coverage: f64,
    pub i_com_eff: f64,
    pub i_sp_eff: f64,
    pub i_com_global: f64,
    pub i_sp_global: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub threshold: f64,
    pub ranking: DimRanking,
    pub kind: ScoringKind,
}

impl Default for ReportConfig {
    fn default() -> Self {
        Self {
            threshold: 0.9,
            ranking: DimRanking::Coverage,
            kind: ScoringKind::Marginal,
        }
    }
}

pub fn score_dimensions(
    subgraphs: &[ExplanationSubgraph],
    partition: &EdgePartition,
    total_edges: usize,
) -> Result<Vec<DimensionScore>> {
    subgraphs
        .iter()
        .map(|s| {
            let (i_com, best_part) = community_score(s, partition);
            Ok(DimensionScore {
                dim: s.dim,
                i_com,
                best_part,
                i_sp: sparsity_score(s.len(), total_edges)?,
                size: s.len(),
            })
        })
        .collect()
}

/// Scores already-extracted subgraphs.
pub fn report_from_subgraphs(
    subgraphs: &[ExplanationSubgraph],
    partition: &EdgePartition,
    total_edges: usize,
    cfg: &ReportConfig,
) -> Result<InterpretabilityReport> {
    let dims = score_dimensions(subgraphs, partition, total_edges)?;
    let order = match cfg.ranking {
        DimRanking::Coverage => rank(subgraphs, |s| s.len() as f64),
        DimRanking::Score => rank(subgraphs, |s| dims[s.dim].i_com),
    };
    let d_eff = select_until_covered(subgraphs, &order, total_edges, cfg.threshold)?;
    let mean = |sel: &mut dyn Iterator<Item = f64>, n: usize| {
        if n == 0 {
            0.0
        } else {
            sel.sum::<f64>() / n as f64
        }
    };
    Ok(InterpretabilityReport {
        coverage: coverage(subgraphs, &d_eff, total_edges),
        i_com_eff: mean(&mut d_eff.iter().map(|&d| dims[d].i_com), d_eff.len()),
        i_sp_eff: mean(&mut d_eff.iter().map(|&d| dims[d].i_sp), d_eff.len()),
        i_com_global: mean(&mut dims.iter().map(|s| s.i_com), dims.len()),
        i_sp_global: mean(&mut dims.iter().map(|s| s.i_sp), dims.len()),
        dims,
        d_eff,
    })
}

/// Utility table → explanation subgraphs → per-dimension scores →
/// effective dimensions and averaged scores.
pub fn report(
    g: &Graph,
    x: &EmbeddingMatrix,
    partition: &EdgePartition,
    cfg: &ReportConfig,
) -> Result<InterpretabilityReport> {
    if partition.edge_parts().len() != g.num_edges() {
        return Err(Error::ShapeMismatch(format!(
            "partition labels {} edges, graph has {}",
            partition.edge_parts().len(),
            g.num_edges()
        )));
    }
    let table = utility_table(g, x, cfg.kind)?;
    let subgraphs = explanation_subgraphs(&table);
    report_from_subgraphs(&subgraphs, partition, g.num_edges(), cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{edge_partition, CommunityAssignment};
    use crate::sbm::{generate_sbm, SbmConfig};

    fn sub(dim: usize, edge_ids: Vec<usize>) -> ExplanationSubgraph {
        ExplanationSubgraph {
            dim,
            edges: edge_ids.iter().map(|&e| (e, e + 1)).collect(),
            weights: vec![1.0; edge_ids.len()],
            edge_ids,
        }
    }

    #[test]
    fn precision_recall_examples() {
        assert_eq!(precision_recall(&[1, 2, 3], &[1, 2, 3]), (1.0, 1.0));
        let ed: Vec<usize> = (0..10).collect();
        let part: Vec<usize> = (0..20).collect();
        let (p, r) = precision_recall(&ed, &part);
        assert_eq!((p, r), (1.0, 0.5));
        assert!((f1(p, r) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(precision_recall(&[1, 2], &[3, 4]), (0.0, 0.0));
        assert_eq!(f1(0.0, 0.0), 0.0);
    }

    fn blocks() -> (Graph, EdgePartition) {
        let (g, c) = generate_sbm(&SbmConfig::default()).unwrap();
        let p = edge_partition(&g, &c).unwrap();
        (g, p)
    }

    #[test]
    fn community_score_exact_part() {
        let (_, p) = blocks();
        let parts = p.parts();
        let s = sub(0, parts[3].clone());
        assert_eq!(community_score(&s, &p), (1.0, Some(3)));
        assert_eq!(community_score(&sub(1, vec![]), &p), (0.0, None));
    }

    #[test]
    fn community_score_matches_brute_force() {
        let (_, p) = blocks();
        let parts = p.parts();
        // 5 edges from each of parts 0..4 (n = 4 parts of 45 edges each)
        let ids: Vec<usize> = (0..4).flat_map(|i| parts[i][..5].to_vec()).collect();
        let s = sub(0, ids.clone());
        let brute = parts
            .iter()
            .map(|part| {
                let (pr, rc) = precision_recall(&ids, part);
                f1(pr, rc)
            })
            .fold(0.0, f64::max);
        let (score, best) = community_score(&s, &p);
        assert!((score - brute).abs() < 1e-15);
        // precision 1/4, recall 5/45
        let expected = f1(0.25, 5.0 / 45.0);
        assert!((score - expected).abs() < 1e-15);
        assert_eq!(best, Some(0));
    }

    #[test]
    fn community_score_invariant_to_relabeling() {
        let (g, c) = generate_sbm(&SbmConfig::default()).unwrap();
        let p = edge_partition(&g, &c).unwrap();
        let shuffled: Vec<usize> = c.membership().iter().map(|&b| 7 - b).collect();
        let q = edge_partition(&g, &CommunityAssignment::from_labels(&shuffled)).unwrap();
        let ids: Vec<usize> = (0..360).step_by(7).collect();
        assert_eq!(
            community_score(&sub(0, ids.clone()), &p).0,
            community_score(&sub(0, ids), &q).0
        );
    }

    fn literal_entropy(subgraph: &[usize], total: usize) -> f64 {
        let z = subgraph.len() as f64;
        let set: HashSet<usize> = subgraph.iter().copied().collect();
        let h: f64 = (0..total)
            .map(|e| {
                let p = if set.contains(&e) { 1.0 / z } else { 0.0 };
                if p > 0.0 {
                    -p * p.ln()
                } else {
                    0.0
                }
            })
            .sum();
        h / (total as f64).ln()
    }

    #[test]
    fn sparsity_examples() {
        assert_eq!(sparsity_score(100, 100).unwrap(), 1.0);
        assert_eq!(sparsity_score(1, 100).unwrap(), 0.0);
        assert!((sparsity_score(10, 100).unwrap() - 0.5).abs() < 1e-15);
        let ids: Vec<usize> = (0..10).collect();
        assert!((literal_entropy(&ids, 100) - 0.5).abs() < 1e-12);
        assert_eq!(sparsity_score(0, 100).unwrap(), 0.0);
        assert!(sparsity_score(1, 1).is_err());
    }

    #[test]
    fn sparsity_matches_literal_sum() {
        for (z, total) in [(3usize, 17usize), (40, 41), (7, 360), (2, 2)] {
            let ids: Vec<usize> = (0..z).collect();
            let closed = sparsity_score(z, total).unwrap();
            assert!((closed - literal_entropy(&ids, total)).abs() < 1e-12);
        }
        let a = sparsity_score(5, 50).unwrap();
        let b = sparsity_score(6, 50).unwrap();
        assert!(a <= b);
    }

    #[test]
    fn effective_dimension_examples() {
        let one_full = [sub(0, vec![0]), sub(1, (0..10).collect())];
        assert_eq!(effective_dimensions(&one_full, 10, 0.9).unwrap(), vec![1]);
        let halves = [sub(0, (0..5).collect()), sub(1, (5..10).collect())];
        assert_eq!(effective_dimensions(&halves, 10, 0.9).unwrap(), vec![0, 1]);
        let blocks: Vec<ExplanationSubgraph> = (0..8)
            .map(|d| sub(d, (d * 45..(d + 1) * 45).collect()))
            .collect();
        assert_eq!(effective_dimensions(&blocks, 360, 0.9).unwrap().len(), 8);
        assert!(effective_dimensions(&halves, 10, 0.0).is_err());
    }

    #[test]
    fn inactive_dims_are_skipped() {
        let subs = [sub(0, vec![]), sub(1, vec![0, 1]), sub(2, vec![2])];
        assert_eq!(effective_dimensions(&subs, 10, 1.0).unwrap(), vec![1, 2]);
    }

    #[test]
    fn block_aligned_report() {
        let (_, p) = blocks();
        let subs: Vec<ExplanationSubgraph> = p
            .parts()
            .into_iter()
            .enumerate()
            .map(|(d, ids)| sub(d, ids))
            .collect();
        let r = report_from_subgraphs(&subs, &p, 360, &ReportConfig::default()).unwrap();
        assert_eq!(r.i_com_eff, 1.0);
        let expected = 45f64.ln() / 360f64.ln();
        assert!((r.i_sp_eff - expected).abs() < 1e-12);
        assert!((expected - 0.647).abs() < 1e-3);
        assert_eq!(r.coverage, 1.0);
        let json = serde_json::to_value(&r).unwrap();
        for key in [
            "dims",
            "d_eff",
            "coverage",
            "i_com_eff",
            "i_sp_eff",
            "i_com_global",
            "i_sp_global",
        ] {
            assert!(json.get(key).is_some(), "{key}");
        }
    }
}

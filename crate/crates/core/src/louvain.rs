//! Louvain community detection and Newman modularity.

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::graph::{CommunityAssignment, Graph};
use crate::rng::{stream_rng, Stream};

/// Newman modularity `Q = Σ_c [L_c/m − (d_c/2m)²]`.
pub fn modularity(g: &Graph, c: &CommunityAssignment) -> f64 {
    let m = g.num_edges() as f64;
    if m == 0.0 {
        return 0.0;
    }
    let k = c.num_communities();
    let mut internal = vec![0.0; k];
    let mut degree = vec![0.0; k];
    for &(u, v) in g.edges() {
        if c.community(u) == c.community(v) {
            internal[c.community(u)] += 1.0;
        }
    }
    for v in 0..g.num_nodes() {
        degree[c.community(v)] += g.degree(v) as f64;
    }
    internal
        .iter()
        .zip(&degree)
        .map(|(l, d)| l / m - (d / (2.0 * m)).powi(2))
        .sum()
}

#[derive(Debug, Clone)]
pub struct LouvainOutcome {
    pub assignment: CommunityAssignment,
    /// Modularity of the singleton start followed by the value after each
    /// aggregation level.
    pub modularity_trace: Vec<f64>,
}

pub fn louvain(g: &Graph, seed: u64) -> Result<CommunityAssignment> {
    louvain_with_trace(g, seed).map(|o| o.assignment)
}

/// Multi-level Louvain. Nodes are visited in a seeded random order and
/// moved immediately to the neighbouring community of largest positive
/// gain; levels repeat until a local-moving phase makes no move.
pub fn louvain_with_trace(g: &Graph, seed: u64) -> Result<LouvainOutcome> {
    if g.num_edges() == 0 {
        return Err(Error::EmptyGraph);
    }
    let mut rng = stream_rng(seed, Stream::Louvain);
    let mut level = WeightedGraph::from_graph(g);
    // membership of every original node in the current level's nodes
    let mut node_map: Vec<usize> = (0..g.num_nodes()).collect();
    let mut trace = vec![modularity(
        g,
        &CommunityAssignment::singletons(g.num_nodes()),
    )];

    loop {
        let (comm, moved) = level.local_moves(&mut rng);
        if !moved {
            break;
        }
        let (relabel, count) = compact(&comm);
        for slot in node_map.iter_mut() {
            *slot = relabel[*slot];
        }
        level = level.aggregate(&relabel, count);
        trace.push(modularity(g, &CommunityAssignment::from_labels(&node_map)));
    }

    Ok(LouvainOutcome {
        assignment: CommunityAssignment::from_labels(&node_map),
        modularity_trace: trace,
    })
}

fn compact(comm: &[usize]) -> (Vec<usize>, usize) {
    let mut ids = vec![usize::MAX; comm.len()];
    let mut next = 0;
    let relabel = comm
        .iter()
        .map(|&c| {
            if ids[c] == usize::MAX {
                ids[c] = next;
                next += 1;
            }
            ids[c]
        })
        .collect();
    (relabel, next)
}

struct WeightedGraph {
    /// Off-diagonal neighbours with summed weights.
    adj: Vec<Vec<(usize, f64)>>,
    /// Self-loop weight (each internal edge of an aggregated node counted once).
    self_loops: Vec<f64>,
    /// Weighted degree, self-loops counted twice.
    strength: Vec<f64>,
    two_m: f64,
}

impl WeightedGraph {
    fn from_graph(g: &Graph) -> Self {
        let adj: Vec<Vec<(usize, f64)>> = (0..g.num_nodes())
            .map(|v| g.neighbors(v).iter().map(|&w| (w, 1.0)).collect())
            .collect();
        Self::new(adj, vec![0.0; g.num_nodes()])
    }

    fn new(adj: Vec<Vec<(usize, f64)>>, self_loops: Vec<f64>) -> Self {
        let strength: Vec<f64> = adj
            .iter()
            .zip(&self_loops)
            .map(|(nbrs, s)| nbrs.iter().map(|&(_, w)| w).sum::<f64>() + 2.0 * s)
            .collect();
        let two_m = strength.iter().sum();
        Self {
            adj,
            self_loops,
            strength,
            two_m,
        }
    }

    fn len(&self) -> usize {
        self.adj.len()
    }

    fn local_moves(&self, rng: &mut impl rand::Rng) -> (Vec<usize>, bool) {
        let n = self.len();
        let mut comm: Vec<usize> = (0..n).collect();
        let mut total = self.strength.clone();
        let mut order: Vec<usize> = (0..n).collect();
        let mut link = vec![0.0; n];
        let mut touched: Vec<usize> = Vec::new();
        let mut moved_any = false;

        loop {
            order.shuffle(rng);
            let mut moved = false;
            for &i in &order {
                let ki = self.strength[i];
                let own = comm[i];

                touched.clear();
                touched.push(own);
                link[own] = 0.0;
                for &(j, w) in &self.adj[i] {
                    let c = comm[j];
                    if link[c] == 0.0 && !touched.contains(&c) {
                        touched.push(c);
                    }
                    link[c] += w;
                }

                total[own] -= ki;
                let gain = |c: usize| link[c] - total[c] * ki / self.two_m;
                let mut best = own;
                let mut best_gain = gain(own);
                for &c in &touched {
                    let gc = gain(c);
                    if gc > best_gain + 1e-12 {
                        best = c;
                        best_gain = gc;
                    }
                }
                total[best] += ki;
                if best != own {
                    comm[i] = best;
                    moved = true;
                    moved_any = true;
                }
                for &c in &touched {
                    link[c] = 0.0;
                }
            }
            if !moved {
                break;
            }
        }
        (comm, moved_any)
    }

    fn aggregate(&self, relabel: &[usize], count: usize) -> Self {
        let mut self_loops = vec![0.0; count];
        let mut merged: Vec<std::collections::BTreeMap<usize, f64>> =
            vec![Default::default(); count];
        for (i, nbrs) in self.adj.iter().enumerate() {
            let ci = relabel[i];
            self_loops[ci] += self.self_loops[i];
            for &(j, w) in nbrs {
                let cj = relabel[j];
                if ci == cj {
                    // each internal edge is seen from both endpoints
                    self_loops[ci] += w / 2.0;
                } else {
                    *merged[ci].entry(cj).or_insert(0.0) += w;
                }
            }
        }
        let adj = merged
            .into_iter()
            .map(|m| m.into_iter().collect())
            .collect();
        Self::new(adj, self_loops)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sbm::{generate_sbm, SbmConfig};
    use rand::Rng;

    fn two_triangles() -> Graph {
        Graph::from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]).unwrap()
    }

    #[test]
    fn modularity_single_community_is_zero() {
        let g = two_triangles();
        let c = CommunityAssignment::from_labels(&[0; 6]);
        assert!(modularity(&g, &c).abs() < 1e-15);
    }

    #[test]
    fn modularity_two_triangles_is_half() {
        let g = two_triangles();
        let c = CommunityAssignment::from_labels(&[0, 0, 0, 1, 1, 1]);
        assert!((modularity(&g, &c) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn louvain_splits_triangles() {
        let g = two_triangles();
        for seed in 0..10 {
            let c = louvain(&g, seed).unwrap();
            assert_eq!(c.num_communities(), 2);
            assert_eq!(c.community(0), c.community(2));
            assert_ne!(c.community(0), c.community(3));
        }
    }

    #[test]
    fn louvain_recovers_cliques() {
        let (g, blocks) = generate_sbm(&SbmConfig::default()).unwrap();
        for seed in 0..5 {
            let found = louvain_with_trace(&g, seed).unwrap();
            assert_eq!(found.assignment, blocks);
            for w in found.modularity_trace.windows(2) {
                assert!(w[1] >= w[0] - 1e-12);
            }
        }
    }

    #[test]
    fn block_modularity_beats_random_assignment() {
        let (g, blocks) = generate_sbm(&SbmConfig::default()).unwrap();
        let mut rng = stream_rng(3, Stream::Louvain);
        let random: Vec<usize> = (0..80).map(|_| rng.random_range(0..8)).collect();
        let random = CommunityAssignment::from_labels(&random);
        assert!(modularity(&g, &random) < modularity(&g, &blocks));
    }

    #[test]
    fn louvain_is_deterministic_per_seed() {
        let cfg = SbmConfig {
            num_blocks: 4,
            block_size: 25,
            intra_prob: 0.2,
            inter_prob: 0.02,
            seed: 11,
        };
        let (g, _) = generate_sbm(&cfg).unwrap();
        assert_eq!(louvain(&g, 5).unwrap(), louvain(&g, 5).unwrap());
        let out = louvain_with_trace(&g, 5).unwrap();
        let q = modularity(&g, &out.assignment);
        assert!(q >= out.modularity_trace[0]);
        assert!((q - out.modularity_trace.last().unwrap()).abs() < 1e-12);
    }
}

//! Undirected simple graphs, edge-list I/O, connected components, and the
//! community-derived edge partitions used as interpretability ground truth.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader, Read};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// Canonical undirected edge, always stored with `u < v`.
pub type Edge = (usize, usize);

#[inline]
pub fn canonical(u: usize, v: usize) -> Edge {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

/// Undirected, unweighted simple graph over nodes `0..num_nodes`.
///
/// Edges are kept sorted in canonical order so an edge's index can be found
/// by binary search; every per-edge table in the crate is indexed by that
/// position.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    num_nodes: usize,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<usize>>,
    labels: Vec<String>,
}

impl Graph {
    /// Builds a graph from arbitrary pairs. Self-loops are dropped and
    /// duplicates merged; node labels default to the decimal index.
    pub fn from_edges<I>(num_nodes: usize, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let labels = (0..num_nodes).map(|i| i.to_string()).collect();
        Self::with_labels(labels, pairs)
    }

    pub fn with_labels<I>(labels: Vec<String>, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let num_nodes = labels.len();
        let mut edges = Vec::new();
        for (u, v) in pairs {
            if u >= num_nodes || v >= num_nodes {
                return Err(Error::InvalidParameter(format!(
                    "edge ({u}, {v}) out of range for {num_nodes} nodes"
                )));
            }
            if u != v {
                edges.push(canonical(u, v));
            }
        }
        edges.sort_unstable();
        edges.dedup();

        let mut adjacency = vec![Vec::new(); num_nodes];
        for &(u, v) in &edges {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(Self {
            num_nodes,
            edges,
            adjacency,
            labels,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, v: usize) -> &str {
        &self.labels[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edge_index(u, v).is_some()
    }

    /// Position of the edge `{u, v}` in [`Graph::edges`].
    pub fn edge_index(&self, u: usize, v: usize) -> Option<usize> {
        if u == v {
            return None;
        }
        self.edges.binary_search(&canonical(u, v)).ok()
    }

    pub fn label_index(&self) -> HashMap<&str, usize> {
        self.labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.as_str(), i))
            .collect()
    }

    /// Same node set, different edges.
    pub fn with_edges(&self, edges: &[Edge]) -> Result<Self> {
        Self::with_labels(self.labels.clone(), edges.iter().copied())
    }

    /// Component id per node; ids are assigned in order of the smallest
    /// node index of each component.
    pub fn connected_components(&self) -> Vec<usize> {
        let mut comp = vec![usize::MAX; self.num_nodes];
        let mut next = 0;
        let mut queue = VecDeque::new();
        for start in 0..self.num_nodes {
            if comp[start] != usize::MAX {
                continue;
            }
            comp[start] = next;
            queue.push_back(start);
            while let Some(u) = queue.pop_front() {
                for &w in &self.adjacency[u] {
                    if comp[w] == usize::MAX {
                        comp[w] = next;
                        queue.push_back(w);
                    }
                }
            }
            next += 1;
        }
        comp
    }

    /// Induced subgraph on `keep` (must be sorted ascending); indices are
    /// recompacted in the same order and labels carried over.
    pub fn induced_subgraph(&self, keep: &[usize]) -> Result<Self> {
        let mut remap = vec![usize::MAX; self.num_nodes];
        for (new, &old) in keep.iter().enumerate() {
            remap[old] = new;
        }
        let labels = keep.iter().map(|&v| self.labels[v].clone()).collect();
        let edges = self.edges.iter().filter_map(|&(u, v)| {
            let (a, b) = (remap[u], remap[v]);
            (a != usize::MAX && b != usize::MAX).then_some((a, b))
        });
        Self::with_labels(labels, edges)
    }
}

/// Counters reported while parsing an edge list.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadStats {
    pub lines: usize,
    pub self_loops: usize,
    pub duplicates: usize,
}

/// Parses the `u<ws>v` edge-list dialect. Ids are arbitrary strings mapped
/// to dense indices in order of first appearance; `#` starts a comment line.
pub fn parse_edge_list<R: Read>(reader: R, source: &Path) -> Result<(Graph, LoadStats)> {
    let mut ids: HashMap<String, usize> = HashMap::new();
    let mut labels: Vec<String> = Vec::new();
    let mut pairs = Vec::new();
    let mut stats = LoadStats::default();

    let mut intern = |tok: &str, labels: &mut Vec<String>| -> usize {
        if let Some(&i) = ids.get(tok) {
            return i;
        }
        let i = labels.len();
        ids.insert(tok.to_owned(), i);
        labels.push(tok.to_owned());
        i
    };

    for (lineno, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        stats.lines += 1;
        let mut toks = trimmed.split_whitespace();
        let (Some(a), Some(b)) = (toks.next(), toks.next()) else {
            return Err(Error::Parse {
                path: source.to_path_buf(),
                line: lineno + 1,
                message: format!("expected two node ids, found `{trimmed}`"),
            });
        };
        let u = intern(a, &mut labels);
        let v = intern(b, &mut labels);
        if u == v {
            stats.self_loops += 1;
            continue;
        }
        pairs.push((u, v));
    }

    let raw = pairs.len();
    let graph = Graph::with_labels(labels, pairs)?;
    stats.duplicates = raw - graph.num_edges();
    if graph.num_edges() == 0 {
        return Err(Error::EmptyGraph);
    }
    if stats.self_loops > 0 {
        log::warn!(
            "{}: dropped {} self-loop(s)",
            source.display(),
            stats.self_loops
        );
    }
    Ok((graph, stats))
}

pub fn load_edge_list(path: impl AsRef<Path>) -> Result<Graph> {
    let path = path.as_ref();
    let file = fs::File::open(path)?;
    parse_edge_list(file, path).map(|(g, _)| g)
}

pub fn format_edge_list(g: &Graph) -> String {
    let mut out = String::new();
    for &(u, v) in g.edges() {
        let _ = writeln!(out, "{}\t{}", g.label(u), g.label(v));
    }
    out
}

pub fn write_edge_list(g: &Graph, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, format_edge_list(g))?;
    Ok(())
}

/// Induced subgraph on the largest connected component. Ties go to the
/// component holding the smallest node index.
pub fn largest_connected_component(g: &Graph) -> Result<Graph> {
    if g.num_nodes() == 0 {
        return Err(Error::EmptyGraph);
    }
    let comp = g.connected_components();
    let num = comp.iter().max().map_or(0, |&m| m + 1);
    let mut sizes = vec![0usize; num];
    for &c in &comp {
        sizes[c] += 1;
    }
    // component ids follow smallest-member order, so the first maximum wins the tie
    let best = sizes
        .iter()
        .enumerate()
        .fold(0, |best, (c, &s)| if s > sizes[best] { c } else { best });
    let keep: Vec<usize> = (0..g.num_nodes()).filter(|&v| comp[v] == best).collect();
    g.induced_subgraph(&keep)
}

/// Node-level community membership with contiguous ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommunityAssignment {
    membership: Vec<usize>,
    num_communities: usize,
}

impl CommunityAssignment {
    /// Relabels arbitrary ids to `0..k` in order of first appearance.
    pub fn from_labels(raw: &[usize]) -> Self {
        let mut map = HashMap::new();
        let membership = raw
            .iter()
            .map(|&c| {
                let next = map.len();
                *map.entry(c).or_insert(next)
            })
            .collect();
        Self {
            membership,
            num_communities: map.len(),
        }
    }

    pub fn singletons(n: usize) -> Self {
        Self {
            membership: (0..n).collect(),
            num_communities: n,
        }
    }

    pub fn community(&self, v: usize) -> usize {
        self.membership[v]
    }

    pub fn membership(&self) -> &[usize] {
        &self.membership
    }

    pub fn num_nodes(&self) -> usize {
        self.membership.len()
    }

    pub fn num_communities(&self) -> usize {
        self.num_communities
    }

    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_communities];
        for (v, &c) in self.membership.iter().enumerate() {
            out[c].push(v);
        }
        out
    }
}

/// Writes `node<TAB>community` lines using the graph's node labels.
pub fn format_communities(g: &Graph, c: &CommunityAssignment) -> String {
    let mut out = String::new();
    for v in 0..g.num_nodes() {
        let _ = writeln!(out, "{}\t{}", g.label(v), c.community(v));
    }
    out
}

pub fn write_communities(g: &Graph, c: &CommunityAssignment, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, format_communities(g, c))?;
    Ok(())
}

/// Reads a community file and aligns it with `g`'s node labels. Every node
/// of `g` must be listed.
pub fn load_communities(g: &Graph, path: impl AsRef<Path>) -> Result<CommunityAssignment> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let index = g.label_index();
    let mut raw = vec![usize::MAX; g.num_nodes()];
    let parse_err = |line: usize, message: String| Error::Parse {
        path: PathBuf::from(path),
        line,
        message,
    };
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut toks = line.split_whitespace();
        let (Some(node), Some(comm)) = (toks.next(), toks.next()) else {
            return Err(parse_err(
                lineno + 1,
                format!("expected `node community`, found `{line}`"),
            ));
        };
        let comm: usize = comm
            .parse()
            .map_err(|_| parse_err(lineno + 1, format!("bad community id `{comm}`")))?;
        // nodes outside the graph (e.g. dropped by LCC restriction) are ignored
        if let Some(&v) = index.get(node) {
            raw[v] = comm;
        }
    }
    if let Some(v) = raw.iter().position(|&c| c == usize::MAX) {
        return Err(Error::InvalidParameter(format!(
            "{}: node `{}` has no community",
            path.display(),
            g.label(v)
        )));
    }
    // contiguous relabeling ordered by the original ids
    let mut ids: Vec<usize> = raw.clone();
    ids.sort_unstable();
    ids.dedup();
    let relabeled: Vec<usize> = raw
        .iter()
        .map(|c| ids.binary_search(c).expect("present"))
        .collect();
    Ok(CommunityAssignment {
        num_communities: ids.len(),
        membership: relabeled,
    })
}

/// Ground-truth labeling of edges by the unordered pair of endpoint
/// communities. Parts are numbered by ascending key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgePartition {
    edge_part: Vec<usize>,
    keys: Vec<(usize, usize)>,
    sizes: Vec<usize>,
}

impl EdgePartition {
    pub fn num_parts(&self) -> usize {
        self.keys.len()
    }

    /// Part of the edge at position `edge` in the source graph's edge list.
    pub fn part_of_edge(&self, edge: usize) -> usize {
        self.edge_part[edge]
    }

    pub fn edge_parts(&self) -> &[usize] {
        &self.edge_part
    }

    /// Community pair `{c(u), c(v)}` as `(min, max)`.
    pub fn key(&self, part: usize) -> (usize, usize) {
        self.keys[part]
    }

    pub fn part_size(&self, part: usize) -> usize {
        self.sizes[part]
    }

    pub fn part_sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Edge positions in each part.
    pub fn parts(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.keys.len()];
        for (e, &p) in self.edge_part.iter().enumerate() {
            out[p].push(e);
        }
        out
    }
}

pub fn edge_partition(g: &Graph, c: &CommunityAssignment) -> Result<EdgePartition> {
    if c.num_nodes() != g.num_nodes() {
        return Err(Error::ShapeMismatch(format!(
            "community assignment covers {} nodes, graph has {}",
            c.num_nodes(),
            g.num_nodes()
        )));
    }
    let edge_keys: Vec<(usize, usize)> = g
        .edges()
        .iter()
        .map(|&(u, v)| canonical(c.community(u), c.community(v)))
        .collect();
    let mut key_ids: BTreeMap<(usize, usize), usize> = edge_keys.iter().map(|&k| (k, 0)).collect();
    for (i, id) in key_ids.values_mut().enumerate() {
        *id = i;
    }
    let keys: Vec<(usize, usize)> = key_ids.keys().copied().collect();
    let mut sizes = vec![0; keys.len()];
    let edge_part = edge_keys
        .iter()
        .map(|k| {
            let p = key_ids[k];
            sizes[p] += 1;
            p
        })
        .collect();
    Ok(EdgePartition {
        edge_part,
        keys,
        sizes,
    })
}

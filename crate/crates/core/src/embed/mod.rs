//! Node embeddings: the matrix type, word2vec text I/O, DeepWalk-style
//! training and multiplicative noise.

mod perturb;
mod sgns;
mod walks;

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ndarray::{Array2, ArrayView1};

pub use perturb::perturb_embeddings;
pub use sgns::{train_sgns, ProbeBatch, SgnsConfig, SgnsModel};
pub use walks::{sample_walks, WalkConfig};

use crate::error::{Error, Result};
use crate::graph::Graph;

/// `D × |V|` real matrix; column `v` is the embedding of node `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    values: Array2<f64>,
    node_ids: Vec<String>,
}

impl EmbeddingMatrix {
    pub fn new(values: Array2<f64>, node_ids: Vec<String>) -> Result<Self> {
        if values.ncols() != node_ids.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} columns but {} node ids",
                values.ncols(),
                node_ids.len()
            )));
        }
        if let Some(bad) = values.iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "embedding contains non-finite entry {bad}"
            )));
        }
        Ok(Self { values, node_ids })
    }

    /// Node ids default to decimal indices.
    pub fn from_values(values: Array2<f64>) -> Result<Self> {
        let ids = (0..values.ncols()).map(|i| i.to_string()).collect();
        Self::new(values, ids)
    }

    /// Builds from per-node rows (`rows[v]` has length `dims`).
    pub fn from_node_rows(rows: &[Vec<f64>], node_ids: Vec<String>) -> Result<Self> {
        let dims = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dims) {
            return Err(Error::ShapeMismatch("ragged embedding rows".into()));
        }
        let values = Array2::from_shape_fn((dims, rows.len()), |(d, v)| rows[v][d]);
        Self::new(values, node_ids)
    }

    pub fn dims(&self) -> usize {
        self.values.nrows()
    }

    pub fn num_nodes(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn into_values(self) -> Array2<f64> {
        self.values
    }

    pub fn node_ids(&self) -> &[String] {
        &self.node_ids
    }

    pub fn column(&self, v: usize) -> ArrayView1<'_, f64> {
        self.values.column(v)
    }

    /// Contiguous `|V| × D` copy, one row per node.
    pub fn node_major(&self) -> Array2<f64> {
        self.values.t().as_standard_layout().into_owned()
    }

    /// Reorders columns to follow `g`'s node order, matching on node ids.
    pub fn aligned_to(&self, g: &Graph) -> Result<Self> {
        let index: HashMap<&str, usize> = self
            .node_ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.as_str(), i))
            .collect();
        let mut cols = Vec::with_capacity(g.num_nodes());
        for label in g.labels() {
            match index.get(label.as_str()) {
                Some(&c) => cols.push(c),
                None => return Err(Error::MissingNode(label.clone())),
            }
        }
        let values = Array2::from_shape_fn((self.dims(), cols.len()), |(d, v)| {
            self.values[[d, cols[v]]]
        });
        Self::new(values, g.labels().to_vec())
    }

    /// word2vec text format: header `num_nodes D`, then `id v_1 … v_D`.
    pub fn to_word2vec(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {}", self.num_nodes(), self.dims());
        for (v, id) in self.node_ids.iter().enumerate() {
            out.push_str(id);
            for x in self.values.column(v) {
                let _ = write!(out, " {x}");
            }
            out.push('\n');
        }
        out
    }

    pub fn parse_word2vec(text: &str, source: &Path) -> Result<Self> {
        let err = |line: usize, message: String| Error::Parse {
            path: source.to_path_buf(),
            line,
            message,
        };
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines
            .next()
            .ok_or_else(|| err(1, "missing header".into()))?;
        let mut head = header.split_whitespace();
        let parse_count = |tok: Option<&str>| tok.and_then(|t| t.parse::<usize>().ok());
        let (Some(n), Some(dims)) = (parse_count(head.next()), parse_count(head.next())) else {
            return Err(err(1, format!("bad header `{header}`")));
        };
        let mut ids = Vec::with_capacity(n);
        let mut rows = Vec::with_capacity(n);
        for (lineno, line) in lines {
            let mut toks = line.split_whitespace();
            let id = toks.next().expect("non-empty line").to_owned();
            let row: Vec<f64> = toks
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| err(lineno + 1, format!("bad value: {e}")))?;
            if row.len() != dims {
                return Err(err(
                    lineno + 1,
                    format!("expected {dims} values, found {}", row.len()),
                ));
            }
            ids.push(id);
            rows.push(row);
        }
        if rows.len() != n {
            return Err(err(
                1,
                format!("header announces {n} nodes, found {}", rows.len()),
            ));
        }
        let values = Array2::from_shape_fn((dims, n), |(d, v)| rows[v][d]);
        Self::new(values, ids)
    }

    pub fn write_word2vec(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_word2vec())?;
        Ok(())
    }

    pub fn read_word2vec(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::parse_word2vec(&fs::read_to_string(path)?, path)
    }
}

/// Uniform random walks followed by skip-gram training; the returned
/// matrix carries `g`'s node labels.
pub fn deepwalk(g: &Graph, walks: &WalkConfig, sgns: &SgnsConfig) -> Result<EmbeddingMatrix> {
    let corpus = sample_walks(g, walks)?;
    let x = train_sgns(&corpus, g.num_nodes(), walks.window, sgns)?;
    EmbeddingMatrix::new(x.into_values(), g.labels().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;

    #[test]
    fn word2vec_header_and_rows() {
        let x = EmbeddingMatrix::from_values(array![[1.0, -0.5], [0.25, 3.0]]).unwrap();
        let text = x.to_word2vec();
        assert_eq!(text, "2 2\n0 1 0.25\n1 -0.5 3\n");
    }

    #[test]
    fn word2vec_rejects_wrong_width() {
        let err = EmbeddingMatrix::parse_word2vec("1 3\na 1 2\n", Path::new("e")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn rejects_non_finite() {
        assert!(EmbeddingMatrix::from_values(array![[f64::NAN]]).is_err());
    }

    #[test]
    fn align_reorders_columns() {
        let x = EmbeddingMatrix::new(
            array![[1.0, 2.0, 3.0]],
            vec!["c".into(), "a".into(), "b".into()],
        )
        .unwrap();
        let g = Graph::with_labels(vec!["a".into(), "b".into(), "c".into()], [(0, 1)]).unwrap();
        let y = x.aligned_to(&g).unwrap();
        assert_eq!(y.values(), &array![[2.0, 3.0, 1.0]]);
        let h = Graph::with_labels(vec!["a".into(), "z".into()], [(0, 1)]).unwrap();
        assert!(matches!(x.aligned_to(&h), Err(Error::MissingNode(_))));
    }

    proptest! {
        #[test]
        fn word2vec_round_trip_is_exact(vals in proptest::collection::vec(-1e6f64..1e6, 12)) {
            let x = EmbeddingMatrix::from_values(Array2::from_shape_vec((3, 4), vals).unwrap()).unwrap();
            let back = EmbeddingMatrix::parse_word2vec(&x.to_word2vec(), Path::new("p")).unwrap();
            prop_assert_eq!(back, x);
        }
    }
}

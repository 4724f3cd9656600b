//! Network data model.
//!
//! A subject's predictor is an undirected weighted network on `V` labeled
//! nodes, stored as a symmetric zero-diagonal adjacency matrix. The model only
//! ever sees the `q = V(V-1)/2` upper-triangular entries, laid out row-major:
//! `(1,2), (1,3), ..., (1,V), (2,3), ..., (V-1,V)`. That ordering is a file
//! format contract; posterior sample files and dataset CSVs depend on it.
//!
//! Node indices are 0-based in this API and 1-based in files and messages.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance for symmetry and zero-diagonal checks on ingest.
pub const SYMMETRY_TOLERANCE: f64 = 1e-9;

/// Number of undirected edges between `v` nodes.
pub fn edge_count(v: usize) -> usize {
    v * v.saturating_sub(1) / 2
}

/// Inverse of [`edge_count`]; `None` when `q` is not triangular.
pub fn node_count(q: usize) -> Option<usize> {
    // v = (1 + sqrt(1 + 8q)) / 2
    let disc = 1.0 + 8.0 * q as f64;
    let v = ((1.0 + disc.sqrt()) / 2.0).round() as usize;
    let v = v.max(1);
    (edge_count(v) == q).then_some(v)
}

/// Position of edge `(k, l)`, `k < l`, in the canonical edge order.
#[inline]
pub fn edge_index(v: usize, k: usize, l: usize) -> usize {
    debug_assert!(k < l && l < v);
    k * (2 * v - k - 1) / 2 + (l - k - 1)
}

/// Node pair `(k, l)` with `k < l` at position `idx` of the canonical order.
pub fn edge_nodes(v: usize, idx: usize) -> (usize, usize) {
    let mut k = 0;
    let mut start = 0;
    loop {
        let row = v - k - 1;
        if idx < start + row {
            return (k, k + 1 + idx - start);
        }
        start += row;
        k += 1;
    }
}

/// Iterator over `(k, l)` pairs in canonical edge order.
pub fn edge_pairs(v: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..v).flat_map(move |k| (k + 1..v).map(move |l| (k, l)))
}

/// Column label used in dataset files for edge `(k, l)` (0-based input).
pub fn edge_label(k: usize, l: usize) -> String {
    format!("{}_{}", k + 1, l + 1)
}

/// Canonical positions of the `V-1` edges incident to node `k`, ordered by the
/// other endpoint.
pub fn incident_edges(v: usize, k: usize) -> Vec<usize> {
    (0..v)
        .filter(|&j| j != k)
        .map(|j| if j < k { edge_index(v, j, k) } else { edge_index(v, k, j) })
        .collect()
}

/// A symmetric, zero-diagonal weighted adjacency matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjacencyMatrix {
    entries: DMatrix<f64>,
}

impl AdjacencyMatrix {
    /// Validates and takes ownership of `entries`.
    ///
    /// Pairs that disagree by at most [`SYMMETRY_TOLERANCE`] are replaced by
    /// their average, and diagonal entries within the tolerance are zeroed.
    /// Anything larger is rejected with the offending node pair.
    pub fn new(mut entries: DMatrix<f64>) -> Result<Self> {
        let (rows, cols) = entries.shape();
        if rows != cols {
            return Err(Error::NotSquare { rows, cols });
        }
        let v = rows;
        for k in 0..v {
            let d = entries[(k, k)];
            if !(d.abs() <= SYMMETRY_TOLERANCE) {
                return Err(Error::NonzeroDiagonal { k: k + 1, value: d });
            }
            entries[(k, k)] = 0.0;
            for l in k + 1..v {
                let (a, b) = (entries[(k, l)], entries[(l, k)]);
                if !((a - b).abs() <= SYMMETRY_TOLERANCE) {
                    return Err(Error::Asymmetric { k: k + 1, l: l + 1, a, b });
                }
                let m = 0.5 * (a + b);
                entries[(k, l)] = m;
                entries[(l, k)] = m;
            }
        }
        Ok(Self { entries })
    }

    pub fn zeros(v: usize) -> Self {
        Self { entries: DMatrix::zeros(v, v) }
    }

    /// Builds a matrix from row-major rows, validating as in [`AdjacencyMatrix::new`].
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let v = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != v) {
            return Err(Error::NotSquare { rows: v, cols: bad.len() });
        }
        Self::new(DMatrix::from_fn(v, v, |i, j| rows[i][j]))
    }

    pub fn node_count(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, k: usize, l: usize) -> f64 {
        self.entries[(k, l)]
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<f64> {
        self.entries
    }
}

/// Upper-triangular entries of a `V`-node matrix in canonical edge order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeVector {
    nodes: usize,
    values: Vec<f64>,
}

impl EdgeVector {
    pub fn new(nodes: usize, values: Vec<f64>) -> Result<Self> {
        let q = edge_count(nodes);
        if values.len() != q {
            return Err(Error::Dimension(format!(
                "edge vector for V={nodes} needs {q} entries, got {}",
                values.len()
            )));
        }
        Ok(Self { nodes, values })
    }

    /// Infers `V` from the length, which must be triangular. The empty vector
    /// is taken as the single-node case.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        let nodes = node_count(values.len()).ok_or(Error::NotTriangular(values.len()))?;
        Ok(Self { nodes, values })
    }

    pub fn zeros(nodes: usize) -> Self {
        Self { nodes, values: vec![0.0; edge_count(nodes)] }
    }

    pub fn node_count(&self) -> usize {
        self.nodes
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, k: usize, l: usize) -> f64 {
        let (a, b) = if k < l { (k, l) } else { (l, k) };
        self.values[edge_index(self.nodes, a, b)]
    }

    pub fn dot(&self, other: &[f64]) -> f64 {
        self.values.iter().zip(other).map(|(a, b)| a * b).sum()
    }
}

pub fn vectorize_upper(a: &AdjacencyMatrix) -> EdgeVector {
    let v = a.node_count();
    let values = edge_pairs(v).map(|(k, l)| a.entries[(k, l)]).collect();
    EdgeVector { nodes: v, values }
}

pub fn devectorize(edges: &EdgeVector) -> AdjacencyMatrix {
    let v = edges.nodes;
    let mut m = DMatrix::zeros(v, v);
    for ((k, l), &x) in edge_pairs(v).zip(&edges.values) {
        m[(k, l)] = x;
        m[(l, k)] = x;
    }
    AdjacencyMatrix { entries: m }
}

/// `mu + <A, Gamma>_F`, where `Gamma` holds `gamma_{k,l} / 2` off the diagonal.
/// Equivalently `mu + vec(A)' gamma` over the upper triangle.
pub fn linear_predictor(a: &AdjacencyMatrix, mu: f64, gamma: &EdgeVector) -> Result<f64> {
    let v = a.node_count();
    if gamma.nodes != v {
        return Err(Error::Dimension(format!(
            "network has V={v} but coefficients have V={}",
            gamma.nodes
        )));
    }
    let mut acc = 0.0;
    for ((k, l), &g) in edge_pairs(v).zip(&gamma.values) {
        acc += a.entries[(k, l)] * g;
    }
    Ok(mu + acc)
}

/// Observed data: `n` networks on a common node set and their binary labels.
///
/// Networks are held as the `n x q` design matrix whose rows are the
/// vectorized upper triangles.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkDataset {
    nodes: usize,
    design: DMatrix<f64>,
    labels: Vec<u8>,
}

impl NetworkDataset {
    pub fn new(networks: &[AdjacencyMatrix], labels: Vec<u8>) -> Result<Self> {
        let nodes = networks
            .first()
            .map(|a| a.node_count())
            .ok_or_else(|| Error::InvalidParameter("dataset needs at least one network".into()))?;
        let rows: Vec<EdgeVector> = networks
            .iter()
            .enumerate()
            .map(|(i, a)| {
                if a.node_count() != nodes {
                    Err(Error::Dimension(format!(
                        "network {} has V={} but network 1 has V={nodes}",
                        i + 1,
                        a.node_count()
                    )))
                } else {
                    Ok(vectorize_upper(a))
                }
            })
            .collect::<Result<_>>()?;
        Self::from_edge_vectors(nodes, &rows, labels)
    }

    pub fn from_edge_vectors(nodes: usize, rows: &[EdgeVector], labels: Vec<u8>) -> Result<Self> {
        let q = edge_count(nodes);
        let mut design = DMatrix::zeros(rows.len(), q);
        for (i, r) in rows.iter().enumerate() {
            if r.nodes != nodes {
                return Err(Error::Dimension(format!(
                    "network {} has V={} but expected V={nodes}",
                    i + 1,
                    r.nodes
                )));
            }
            for (j, &x) in r.values.iter().enumerate() {
                design[(i, j)] = x;
            }
        }
        Self::from_design(nodes, design, labels)
    }

    pub fn from_design(nodes: usize, design: DMatrix<f64>, labels: Vec<u8>) -> Result<Self> {
        if design.ncols() != edge_count(nodes) {
            return Err(Error::Dimension(format!(
                "design has {} columns, V={nodes} needs {}",
                design.ncols(),
                edge_count(nodes)
            )));
        }
        if design.nrows() != labels.len() {
            return Err(Error::Dimension(format!(
                "{} networks but {} labels",
                design.nrows(),
                labels.len()
            )));
        }
        if let Some(i) = labels.iter().position(|&y| y > 1) {
            return Err(Error::InvalidParameter(format!(
                "label {} of subject {} is not 0 or 1",
                labels[i],
                i + 1
            )));
        }
        if design.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("non-finite edge weight".into()));
        }
        Ok(Self { nodes, design, labels })
    }

    /// A dataset with no subjects; the posterior then equals the prior.
    pub fn empty(nodes: usize) -> Self {
        Self { nodes, design: DMatrix::zeros(0, edge_count(nodes)), labels: Vec::new() }
    }

    pub fn node_count(&self) -> usize {
        self.nodes
    }

    pub fn edge_count(&self) -> usize {
        self.design.ncols()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn design(&self) -> &DMatrix<f64> {
        &self.design
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn edges(&self, i: usize) -> EdgeVector {
        EdgeVector { nodes: self.nodes, values: self.design.row(i).iter().copied().collect() }
    }

    pub fn network(&self, i: usize) -> AdjacencyMatrix {
        devectorize(&self.edges(i))
    }

    /// Subjects at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Self {
        let design = self.design.select_rows(indices);
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        Self { nodes: self.nodes, design, labels }
    }

    pub fn with_labels(&self, labels: Vec<u8>) -> Result<Self> {
        Self::from_design(self.nodes, self.design.clone(), labels)
    }
}

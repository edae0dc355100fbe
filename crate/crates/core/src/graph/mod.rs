//! Undirected attributed graphs, dataset ingestion and edge sampling.

mod forget;
mod io;
mod sbm;
mod split;

pub use forget::{delete_nodes, is_in_edge, sample_forget_edges, ForgetSet, Locality};
pub use io::{load_graph, save_edges, DEFAULT_FEATURE_DIM};
pub use sbm::generate_sbm;
pub use split::{sample_negatives, split_edges, EdgeSplit};

use crate::error::{Error, Result};
use crate::nn::tensor::Matrix;
use crate::scalar::Scalar;

/// Undirected node pair, stored with `u < v`.
pub type Edge = (usize, usize);

#[inline]
pub fn canonical(u: usize, v: usize) -> Edge {
    if u <= v {
        (u, v)
    } else {
        (v, u)
    }
}

/// Sparsity pattern of the symmetrized edge set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjacencyPattern {
    indptr: Vec<usize>,
    indices: Vec<usize>,
}

impl AdjacencyPattern {
    fn from_edges(num_nodes: usize, edges: &[Edge]) -> Self {
        let mut degree = vec![0usize; num_nodes];
        for &(u, v) in edges {
            degree[u] += 1;
            degree[v] += 1;
        }
        let mut indptr = vec![0usize; num_nodes + 1];
        for i in 0..num_nodes {
            indptr[i + 1] = indptr[i] + degree[i];
        }
        let mut fill = indptr.clone();
        let mut indices = vec![0usize; indptr[num_nodes]];
        for &(u, v) in edges {
            indices[fill[u]] = v;
            fill[u] += 1;
            indices[fill[v]] = u;
            fill[v] += 1;
        }
        for i in 0..num_nodes {
            indices[indptr[i]..indptr[i + 1]].sort_unstable();
        }
        Self { indptr, indices }
    }

    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.indices[self.indptr[u]..self.indptr[u + 1]]
    }

    /// Number of directed entries (twice the undirected edge count).
    pub fn nnz(&self) -> usize {
        self.indices.len()
    }
}

/// Immutable undirected graph with a dense node-feature matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph<T> {
    num_nodes: usize,
    edges: Vec<Edge>,
    features: Matrix<T>,
    csr: AdjacencyPattern,
}

impl<T: Scalar> Graph<T> {
    /// Builds a graph from arbitrary pairs: orientation is normalized,
    /// self-loops and duplicates are dropped, and the edge list is sorted.
    pub fn new(num_nodes: usize, edges: impl IntoIterator<Item = Edge>, features: Matrix<T>) -> Result<Self> {
        if features.rows() != num_nodes {
            return Err(Error::shape("graph features rows", num_nodes, features.rows()));
        }
        let mut list = Vec::new();
        for (u, v) in edges {
            if u >= num_nodes || v >= num_nodes {
                return Err(Error::InvalidNode {
                    id: u.max(v),
                    num_nodes,
                });
            }
            if u != v {
                list.push(canonical(u, v));
            }
        }
        list.sort_unstable();
        list.dedup();
        let csr = AdjacencyPattern::from_edges(num_nodes, &list);
        Ok(Self {
            num_nodes,
            edges: list,
            features,
            csr,
        })
    }

    /// Same nodes and features, different edge set.
    pub fn with_edges(&self, edges: impl IntoIterator<Item = Edge>) -> Result<Self> {
        Self::new(self.num_nodes, edges, self.features.clone())
    }

    /// Copy whose feature rows for `nodes` are zero.
    pub fn with_zeroed_features(&self, nodes: &[usize]) -> Self {
        let mut g = self.clone();
        for &n in nodes {
            g.features.row_mut(n).iter_mut().for_each(|x| *x = T::zero());
        }
        g
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

    pub fn features(&self) -> &Matrix<T> {
        &self.features
    }

    pub fn feature_dim(&self) -> usize {
        self.features.cols()
    }

    pub fn csr(&self) -> &AdjacencyPattern {
        &self.csr
    }

    pub fn neighbors(&self, u: usize) -> &[usize] {
        self.csr.neighbors(u)
    }

    pub fn degree(&self, u: usize) -> usize {
        self.neighbors(u).len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.num_nodes && v < self.num_nodes && self.neighbors(u).binary_search(&v).is_ok()
    }
}

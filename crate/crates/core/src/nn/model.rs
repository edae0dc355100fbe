//! GCN and GIN encoders that expose every layer's node embeddings.

use std::fmt;
use std::str::FromStr;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{canonical, Edge, Graph};
use crate::nn::tape::{Tape, Var};
use crate::nn::tensor::{CsrMatrix, Matrix};
use crate::rng::rng_for;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arch {
    Gcn,
    Gin,
}

impl fmt::Display for Arch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Arch::Gcn => "gcn",
            Arch::Gin => "gin",
        })
    }
}

impl FromStr for Arch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gcn" => Ok(Arch::Gcn),
            "gin" => Ok(Arch::Gin),
            other => Err(Error::InvalidArgument(format!("unknown architecture `{other}`"))),
        }
    }
}

impl Arch {
    /// Parameter tensors per layer.
    pub fn tensors_per_layer(self) -> usize {
        match self {
            Arch::Gcn => 1,
            Arch::Gin => 3,
        }
    }
}

/// Weights of a GNN encoder, stored as a flat tensor list.
///
/// GCN layer `l` owns tensor `l` (`dims[l] × dims[l+1]`). GIN layer `l` owns
/// tensors `3l` (first MLP matrix), `3l+1` (second MLP matrix, square) and
/// `3l+2` (1x1 self-weight `ε`).
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams<T> {
    pub arch: Arch,
    pub dims: Vec<usize>,
    pub tensors: Vec<Matrix<T>>,
}

impl<T: Scalar> ModelParams<T> {
    pub fn num_layers(&self) -> usize {
        self.dims.len().saturating_sub(1)
    }

    pub fn tensor_shapes(arch: Arch, dims: &[usize]) -> Vec<(usize, usize)> {
        let mut shapes = Vec::new();
        for w in dims.windows(2) {
            match arch {
                Arch::Gcn => shapes.push((w[0], w[1])),
                Arch::Gin => shapes.extend([(w[0], w[1]), (w[1], w[1]), (1, 1)]),
            }
        }
        shapes
    }

    pub fn validate(&self) -> Result<()> {
        check_dims(&self.dims)?;
        let shapes = Self::tensor_shapes(self.arch, &self.dims);
        if shapes.len() != self.tensors.len() {
            return Err(Error::shape("model tensor count", shapes.len(), self.tensors.len()));
        }
        for (t, s) in self.tensors.iter().zip(&shapes) {
            if t.shape() != *s {
                return Err(Error::shape("model tensor", format!("{s:?}"), format!("{:?}", t.shape())));
            }
            if !t.is_finite() {
                return Err(Error::InvalidArgument("model parameters contain non-finite entries".into()));
            }
        }
        Ok(())
    }

    /// Registers every tensor on `tape`, as trainable leaves or constants.
    pub fn bind<'a>(&self, tape: &mut Tape<'a, T>, trainable: bool) -> Vec<Var> {
        self.tensors
            .iter()
            .map(|t| if trainable { tape.param(t.clone()) } else { tape.constant(t.clone()) })
            .collect()
    }
}

fn check_dims(dims: &[usize]) -> Result<()> {
    if dims.len() < 2 || dims.contains(&0) {
        return Err(Error::InvalidArgument(format!(
            "layer dims must list at least input and output widths, all positive: {dims:?}"
        )));
    }
    Ok(())
}

/// Glorot-uniform initialization; GIN `ε` starts at zero.
pub fn init_params<T: Scalar>(arch: Arch, dims: &[usize], seed: u64) -> Result<ModelParams<T>> {
    check_dims(dims)?;
    let mut rng = rng_for(seed, "init", 0);
    let tensors = ModelParams::<T>::tensor_shapes(arch, dims)
        .into_iter()
        .map(|(r, c)| {
            if (r, c) == (1, 1) && arch == Arch::Gin {
                return Matrix::zeros(1, 1);
            }
            let bound = (6.0 / (r + c) as f64).sqrt();
            let data = (0..r * c).map(|_| T::lit(rng.gen_range(-bound..bound))).collect();
            Matrix::from_vec(r, c, data).expect("shape matches data")
        })
        .collect();
    Ok(ModelParams {
        arch,
        dims: dims.to_vec(),
        tensors,
    })
}

/// Node embeddings from every layer of one forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerEmbeddings<T> {
    per_layer: Vec<Matrix<T>>,
}

impl<T: Scalar> LayerEmbeddings<T> {
    pub fn new(per_layer: Vec<Matrix<T>>) -> Self {
        Self { per_layer }
    }

    pub fn layers(&self) -> &[Matrix<T>] {
        &self.per_layer
    }

    pub fn last(&self) -> &Matrix<T> {
        self.per_layer.last().expect("at least one layer")
    }

    pub fn len(&self) -> usize {
        self.per_layer.len()
    }

    pub fn is_empty(&self) -> bool {
        self.per_layer.is_empty()
    }
}

/// Propagation matrices for one view of the graph.
///
/// `normalized` is `D̃^{-1/2}(A + I)D̃^{-1/2}` (GCN); `raw` is the plain
/// symmetric adjacency without self-loops (GIN sum aggregation).
#[derive(Debug, Clone, PartialEq)]
pub struct NormAdj<T> {
    normalized: CsrMatrix<T>,
    raw: CsrMatrix<T>,
}

impl<T: Scalar> NormAdj<T> {
    pub fn from_edges(num_nodes: usize, edges: &[Edge]) -> Result<Self> {
        let mut degree = vec![1usize; num_nodes];
        let mut raw = Vec::with_capacity(edges.len() * 2);
        let mut seen = std::collections::HashSet::with_capacity(edges.len());
        for &(u, v) in edges {
            if u >= num_nodes || v >= num_nodes {
                return Err(Error::InvalidNode {
                    id: u.max(v),
                    num_nodes,
                });
            }
            if u == v || !seen.insert(canonical(u, v)) {
                continue;
            }
            degree[u] += 1;
            degree[v] += 1;
            raw.push((u, v, T::one()));
            raw.push((v, u, T::one()));
        }
        let weight = |a: usize, b: usize| {
            let d = T::from_usize(degree[a] * degree[b]).expect("degree fits scalar");
            T::one() / d.sqrt()
        };
        let mut norm: Vec<(usize, usize, T)> = raw.iter().map(|&(u, v, _)| (u, v, weight(u, v))).collect();
        norm.extend((0..num_nodes).map(|i| (i, i, weight(i, i))));
        Ok(Self {
            normalized: CsrMatrix::from_triplets(num_nodes, norm),
            raw: CsrMatrix::from_triplets(num_nodes, raw),
        })
    }

    pub fn normalized(&self) -> &CsrMatrix<T> {
        &self.normalized
    }

    pub fn raw(&self) -> &CsrMatrix<T> {
        &self.raw
    }

    pub fn num_nodes(&self) -> usize {
        self.normalized.dim()
    }

    /// Entries of the normalized matrix, self-loops included.
    pub fn nnz(&self) -> usize {
        self.normalized.nnz()
    }

    /// Whether `(u, v)` propagates messages in this view.
    pub fn contains_edge(&self, u: usize, v: usize) -> bool {
        u != v && self.raw.get(u, v) != T::zero()
    }
}

/// Propagation matrix over the graph's edges minus `exclude`, with
/// self-loops and symmetric degree normalization.
pub fn gcn_normalize<T: Scalar>(graph_view: &Graph<T>, exclude: &[Edge]) -> Result<NormAdj<T>> {
    let excluded: std::collections::HashSet<Edge> = exclude.iter().map(|&(u, v)| canonical(u, v)).collect();
    let kept: Vec<Edge> = graph_view
        .edges()
        .iter()
        .copied()
        .filter(|e| !excluded.contains(e))
        .collect();
    NormAdj::from_edges(graph_view.num_nodes(), &kept)
}

/// Records a forward pass on `tape` and returns one node per layer.
///
/// Hidden layers end in ReLU; the last layer is linear.
pub fn forward_on<'a, T: Scalar>(
    tape: &mut Tape<'a, T>,
    arch: Arch,
    weights: &[Var],
    adj: &'a NormAdj<T>,
    features: Var,
) -> Result<Vec<Var>> {
    let per_layer = arch.tensors_per_layer();
    if weights.is_empty() || weights.len() % per_layer != 0 {
        return Err(Error::shape("forward weights", format!("multiple of {per_layer}"), weights.len()));
    }
    let layers = weights.len() / per_layer;
    let mut h = features;
    let mut out = Vec::with_capacity(layers);
    for (l, w) in weights.chunks(per_layer).enumerate() {
        let z = match arch {
            Arch::Gcn => {
                let hw = tape.matmul(h, w[0])?;
                tape.spmm(adj.normalized(), hw)?
            }
            Arch::Gin => {
                let agg = tape.spmm(adj.raw(), h)?;
                let eps_h = tape.scalar_mul(w[2], h)?;
                let self_term = tape.add(h, eps_h)?;
                let combined = tape.add(self_term, agg)?;
                let hidden = tape.matmul(combined, w[0])?;
                let hidden = tape.relu(hidden);
                tape.matmul(hidden, w[1])?
            }
        };
        h = if l + 1 < layers { tape.relu(z) } else { z };
        out.push(h);
    }
    Ok(out)
}

/// Inference-only forward pass.
pub fn forward<T: Scalar>(params: &ModelParams<T>, adj: &NormAdj<T>, features: &Matrix<T>) -> Result<LayerEmbeddings<T>> {
    params.validate()?;
    if features.cols() != params.dims[0] {
        return Err(Error::shape("forward features", params.dims[0], features.cols()));
    }
    if features.rows() != adj.num_nodes() {
        return Err(Error::shape("forward features rows", adj.num_nodes(), features.rows()));
    }
    let mut tape = Tape::new();
    let weights = params.bind(&mut tape, false);
    let x = tape.constant(features.clone());
    let layers = forward_on(&mut tape, params.arch, &weights, adj, x)?;
    Ok(LayerEmbeddings::new(
        layers.into_iter().map(|v| tape.value(v).clone()).collect(),
    ))
}

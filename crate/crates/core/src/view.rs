use crate::error::Result;
use crate::graph::{Edge, ForgetSet, Graph};
use crate::nn::{Matrix, NormAdj};
use crate::scalar::Scalar;

/// What a model sees of the graph: a propagation matrix and node features.
#[derive(Debug, Clone)]
pub struct GraphView<T> {
    pub adj: NormAdj<T>,
    pub features: Matrix<T>,
}

impl<T: Scalar> GraphView<T> {
    /// Messages flow along exactly `edges`.
    pub fn from_edges(graph: &Graph<T>, edges: &[Edge]) -> Result<Self> {
        Ok(Self {
            adj: NormAdj::from_edges(graph.num_nodes(), edges)?,
            features: graph.features().clone(),
        })
    }

    /// Retained training edges only, with deleted nodes' features zeroed.
    pub fn retained(graph: &Graph<T>, forget: &ForgetSet) -> Result<Self> {
        let mut features = graph.features().clone();
        for &n in &forget.deleted_nodes {
            features.row_mut(n).iter_mut().for_each(|x| *x = T::zero());
        }
        Ok(Self {
            adj: NormAdj::from_edges(graph.num_nodes(), &forget.retain)?,
            features,
        })
    }
}

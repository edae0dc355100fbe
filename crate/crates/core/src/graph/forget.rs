use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use serde::{Deserialize, Serialize};

use super::{split::EdgeSplit, Edge, Graph};
use crate::error::{Error, Result};
use crate::rng::rng_for;
use crate::scalar::Scalar;

/// Where the forgotten edges sit relative to the rest of the training graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Locality {
    /// Edges entangled with other training edges within two hops.
    In,
    /// Edges with no other training edge within two hops.
    Out,
    /// Every training edge incident to a set of deleted nodes.
    Node,
}

impl fmt::Display for Locality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Locality::In => "in",
            Locality::Out => "out",
            Locality::Node => "node",
        })
    }
}

impl FromStr for Locality {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "in" => Ok(Locality::In),
            "out" => Ok(Locality::Out),
            "node" => Ok(Locality::Node),
            other => Err(Error::InvalidArgument(format!("unknown locality `{other}`"))),
        }
    }
}

/// Partition of the training edges into a forget set and a retain set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForgetSet {
    pub forget: Vec<Edge>,
    pub retain: Vec<Edge>,
    pub locality: Locality,
    pub deleted_nodes: Vec<usize>,
}

impl ForgetSet {
    /// Sorted, de-duplicated endpoints of the forget edges.
    pub fn forget_endpoints(&self) -> Vec<usize> {
        let set: BTreeSet<usize> = self.forget.iter().flat_map(|&(u, v)| [u, v]).collect();
        set.into_iter().collect()
    }
}

fn train_degrees(train: &[Edge]) -> HashMap<usize, usize> {
    let mut deg = HashMap::new();
    for &(u, v) in train {
        *deg.entry(u).or_insert(0) += 1;
        *deg.entry(v).or_insert(0) += 1;
    }
    deg
}

/// Locality predicate for a training edge `e = (u, v)`.
///
/// True when some other training edge has an endpoint within two hops of
/// `u` or `v`, distances measured in the graph with `e` removed.
pub fn is_in_edge<T: Scalar>(graph: &Graph<T>, train: &[Edge], e: Edge) -> bool {
    in_predicate(graph, &train_degrees(train), e)
}

fn in_predicate<T: Scalar>(graph: &Graph<T>, train_deg: &HashMap<usize, usize>, e: Edge) -> bool {
    let (u, v) = e;
    let other_train_edges = |x: usize| {
        let d = train_deg.get(&x).copied().unwrap_or(0);
        if x == u || x == v {
            d.saturating_sub(1)
        } else {
            d
        }
    };
    let removed = |a: usize, b: usize| (a == u && b == v) || (a == v && b == u);

    let mut frontier = vec![u, v];
    let mut seen: BTreeSet<usize> = frontier.iter().copied().collect();
    for hop in 0..=2 {
        if frontier.iter().any(|&x| other_train_edges(x) > 0) {
            return true;
        }
        if hop == 2 {
            break;
        }
        let mut next = Vec::new();
        for &x in &frontier {
            for &y in graph.neighbors(x) {
                if !removed(x, y) && seen.insert(y) {
                    next.push(y);
                }
            }
        }
        frontier = next;
    }
    false
}

/// Samples `round(ratio * |train|)` training edges whose locality predicate
/// matches `locality` (which must be `In` or `Out`).
pub fn sample_forget_edges<T: Scalar>(
    graph: &Graph<T>,
    split: &EdgeSplit,
    ratio: f64,
    locality: Locality,
    seed: u64,
) -> Result<ForgetSet> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidArgument(format!("forget ratio must be in (0, 1), got {ratio}")));
    }
    let want_in = match locality {
        Locality::In => true,
        Locality::Out => false,
        Locality::Node => {
            return Err(Error::InvalidArgument(
                "node locality is produced by delete_nodes, not edge sampling".into(),
            ))
        }
    };
    let size = (ratio * split.train.len() as f64).round() as usize;
    if size == 0 {
        return Err(Error::EmptyForgetSet);
    }
    let deg = train_degrees(&split.train);
    let candidates: Vec<Edge> = split
        .train
        .iter()
        .copied()
        .filter(|&e| in_predicate(graph, &deg, e) == want_in)
        .collect();
    if candidates.len() < size {
        return Err(Error::Infeasible {
            what: "forget candidates of the requested locality",
            requested: size,
            available: candidates.len(),
        });
    }
    let mut rng = rng_for(seed, "forget", 0);
    let mut forget: Vec<Edge> = index::sample(&mut rng, candidates.len(), size)
        .into_iter()
        .map(|i| candidates[i])
        .collect();
    forget.sort_unstable();
    Ok(partition(split, forget, locality, Vec::new()))
}

/// Forget set consisting of every training edge incident to `node_ids`.
///
/// Node indices stay stable; callers zero the deleted nodes' feature rows
/// when building the retained view.
pub fn delete_nodes<T: Scalar>(graph: &Graph<T>, node_ids: &[usize], split: &EdgeSplit) -> Result<ForgetSet> {
    if let Some(&bad) = node_ids.iter().find(|&&id| id >= graph.num_nodes()) {
        return Err(Error::InvalidNode {
            id: bad,
            num_nodes: graph.num_nodes(),
        });
    }
    let deleted: BTreeSet<usize> = node_ids.iter().copied().collect();
    let forget: Vec<Edge> = split
        .train
        .iter()
        .copied()
        .filter(|(u, v)| deleted.contains(u) || deleted.contains(v))
        .collect();
    if forget.is_empty() {
        return Err(Error::EmptyForgetSet);
    }
    Ok(partition(split, forget, Locality::Node, deleted.into_iter().collect()))
}

fn partition(split: &EdgeSplit, forget: Vec<Edge>, locality: Locality, deleted_nodes: Vec<usize>) -> ForgetSet {
    let forget_set: BTreeSet<Edge> = forget.iter().copied().collect();
    let retain = split
        .train
        .iter()
        .copied()
        .filter(|e| !forget_set.contains(e))
        .collect();
    ForgetSet {
        forget,
        retain,
        locality,
        deleted_nodes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_sbm, split_edges};
    use crate::nn::tensor::Matrix;

    fn graph(n: usize, edges: &[Edge]) -> Graph<f64> {
        Graph::new(n, edges.iter().copied(), Matrix::zeros(n, 1)).unwrap()
    }

    fn all_train(g: &Graph<f64>) -> EdgeSplit {
        EdgeSplit {
            train: g.edges().to_vec(),
            val: vec![],
            test: vec![],
            val_neg: vec![],
            test_neg: vec![],
        }
    }

    #[test]
    fn path_graph_every_edge_is_in() {
        let g = graph(4, &[(0, 1), (1, 2), (2, 3)]);
        for &e in g.edges() {
            assert!(is_in_edge(&g, g.edges(), e));
        }
        let f = sample_forget_edges(&g, &all_train(&g), 0.34, Locality::In, 1).unwrap();
        assert_eq!(f.forget.len(), 1);
        assert_eq!(f.retain.len(), 2);
    }

    #[test]
    fn isolated_edges_are_out() {
        let g = graph(4, &[(0, 1), (2, 3)]);
        assert!(!is_in_edge(&g, g.edges(), (0, 1)));
        let f = sample_forget_edges(&g, &all_train(&g), 0.5, Locality::Out, 5).unwrap();
        assert_eq!(f.forget.len(), 1);
        assert!(matches!(
            sample_forget_edges(&g, &all_train(&g), 0.5, Locality::In, 5),
            Err(Error::Infeasible { available: 0, .. })
        ));
    }

    #[test]
    fn two_hop_reach_through_non_train_edge() {
        // 0-1 train, 1-2 held out, 2-3 train: 3 is two hops from 1.
        let g = graph(4, &[(0, 1), (1, 2), (2, 3)]);
        let train = vec![(0, 1), (2, 3)];
        assert!(is_in_edge(&g, &train, (0, 1)));
        // nearest other train edge (4,5) starts three hops from node 1
        let g = graph(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)]);
        let train = vec![(0, 1), (4, 5)];
        assert!(!is_in_edge(&g, &train, (0, 1)));
    }

    #[test]
    fn sampled_edges_satisfy_predicate() {
        let g: Graph<f64> = generate_sbm(4, 25, 0.2, 0.01, 4, 3).unwrap();
        let split = split_edges(&g, 0.05, 0.05, 3).unwrap();
        let f = sample_forget_edges(&g, &split, 0.1, Locality::In, 8).unwrap();
        assert_eq!(f.forget.len(), (0.1 * split.train.len() as f64).round() as usize);
        for &e in &f.forget {
            assert!(is_in_edge(&g, &split.train, e));
        }
        let mut union: Vec<Edge> = f.forget.iter().chain(&f.retain).copied().collect();
        union.sort_unstable();
        assert_eq!(union, split.train);
        assert_eq!(f, sample_forget_edges(&g, &split, 0.1, Locality::In, 8).unwrap());
    }

    #[test]
    fn ratio_bounds() {
        let g = graph(4, &[(0, 1), (1, 2), (2, 3)]);
        assert!(sample_forget_edges(&g, &all_train(&g), 0.0, Locality::In, 0).is_err());
        assert!(sample_forget_edges(&g, &all_train(&g), 1.0, Locality::In, 0).is_err());
        assert!(matches!(
            sample_forget_edges(&g, &all_train(&g), 0.1, Locality::In, 0),
            Err(Error::EmptyForgetSet)
        ));
    }

    #[test]
    fn delete_star_center() {
        let g = graph(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]);
        let f = delete_nodes(&g, &[0], &all_train(&g)).unwrap();
        assert_eq!(f.forget, g.edges());
        assert!(f.retain.is_empty());
        assert_eq!(f.locality, Locality::Node);
        assert_eq!(f.deleted_nodes, vec![0]);
    }

    #[test]
    fn delete_isolated_or_invalid() {
        let g = graph(4, &[(0, 1)]);
        assert!(matches!(delete_nodes(&g, &[3], &all_train(&g)), Err(Error::EmptyForgetSet)));
        assert!(matches!(delete_nodes(&g, &[9], &all_train(&g)), Err(Error::InvalidNode { id: 9, .. })));
    }

    #[test]
    fn delete_many_nodes_takes_all_incident_train_edges() {
        let g: Graph<f64> = generate_sbm(4, 50, 0.2, 0.01, 4, 1).unwrap();
        let split = split_edges(&g, 0.05, 0.05, 1).unwrap();
        let nodes: Vec<usize> = (0..200).step_by(2).collect();
        let f = delete_nodes(&g, &nodes, &split).unwrap();
        for &(u, v) in &split.train {
            let incident = u % 2 == 0 || v % 2 == 0;
            assert_eq!(incident, f.forget.contains(&(u, v)));
        }
    }
}

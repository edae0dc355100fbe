use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{ForgetSet, Graph};
use crate::nn::{init_params, ModelParams};
use crate::rng::{derive_seed, rng_for};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DestroyerKind {
    /// Untrained model with the source's shape.
    #[serde(alias = "random_init")]
    RandomInit,
    /// The source model read at sampled non-neighbors.
    #[serde(rename = "negative", alias = "negative_pairs")]
    NegativePairs,
}

impl fmt::Display for DestroyerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DestroyerKind::RandomInit => "random",
            DestroyerKind::NegativePairs => "negative",
        })
    }
}

impl FromStr for DestroyerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "random" | "random_init" | "randominit" => Ok(DestroyerKind::RandomInit),
            "negative" | "negative_pairs" | "negativepairs" => Ok(DestroyerKind::NegativePairs),
            other => Err(Error::InvalidArgument(format!("unknown destroyer `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DestroyerSpec<T> {
    pub kind: DestroyerKind,
    pub params: ModelParams<T>,
    /// Forget endpoint -> sampled non-neighbor (negative pairs only).
    pub pair_map: BTreeMap<usize, usize>,
}

pub fn make_destroyer<T: Scalar>(
    kind: DestroyerKind,
    source: &ModelParams<T>,
    forget: &ForgetSet,
    graph: &Graph<T>,
    seed: u64,
) -> Result<DestroyerSpec<T>> {
    source.validate()?;
    match kind {
        DestroyerKind::RandomInit => Ok(DestroyerSpec {
            kind,
            params: init_params(source.arch, &source.dims, derive_seed(seed, "destroyer-init", 0))?,
            pair_map: BTreeMap::new(),
        }),
        DestroyerKind::NegativePairs => {
            if forget.forget.is_empty() {
                return Err(Error::EmptyForgetSet);
            }
            Ok(DestroyerSpec {
                kind,
                params: source.clone(),
                pair_map: sample_pair_map(graph, &forget.forget_endpoints(), derive_seed(seed, "pairs", 0))?,
            })
        }
    }
}

/// One uniformly random non-neighbor (in the full graph) for each node.
pub fn sample_pair_map<T: Scalar>(graph: &Graph<T>, nodes: &[usize], seed: u64) -> Result<BTreeMap<usize, usize>> {
    let n = graph.num_nodes();
    let mut rng = rng_for(seed, "pair-map", 0);
    let mut map = BTreeMap::new();
    for &u in nodes {
        if u >= n {
            return Err(Error::InvalidNode { id: u, num_nodes: n });
        }
        let available = n - 1 - graph.degree(u);
        if available == 0 {
            return Err(Error::Infeasible {
                what: "non-neighbors of a forget endpoint",
                requested: 1,
                available: 0,
            });
        }
        // rejection sampling while non-neighbors are common, else enumerate
        let pick = if 2 * available >= n {
            loop {
                let w = rng.gen_range(0..n);
                if w != u && !graph.has_edge(u, w) {
                    break w;
                }
            }
        } else {
            let k = rng.gen_range(0..available);
            (0..n)
                .filter(|&w| w != u && !graph.has_edge(u, w))
                .nth(k)
                .expect("k < number of non-neighbors")
        };
        map.insert(u, pick);
    }
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_sbm, sample_forget_edges, split_edges, EdgeSplit, Locality};
    use crate::nn::{Arch, Matrix};

    fn forget_all(g: &Graph<f64>) -> ForgetSet {
        ForgetSet {
            forget: g.edges().to_vec(),
            retain: vec![],
            locality: Locality::In,
            deleted_nodes: vec![],
        }
    }

    #[test]
    fn random_init_is_seeded() {
        let g: Graph<f64> = generate_sbm(2, 5, 0.5, 0.1, 3, 0).unwrap();
        let src = init_params::<f64>(Arch::Gin, &[3, 4, 2], 9).unwrap();
        let f = forget_all(&g);
        let a = make_destroyer(DestroyerKind::RandomInit, &src, &f, &g, 5).unwrap();
        let b = make_destroyer(DestroyerKind::RandomInit, &src, &f, &g, 5).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.params, src);
        assert_eq!(a.params.dims, src.dims);
    }

    #[test]
    fn triangle_plus_isolated_maps_to_the_isolated_node() {
        let g = Graph::new(4, [(0, 1), (1, 2), (0, 2)], Matrix::<f64>::zeros(4, 2)).unwrap();
        let src = init_params::<f64>(Arch::Gcn, &[2, 2], 0).unwrap();
        let d = make_destroyer(DestroyerKind::NegativePairs, &src, &forget_all(&g), &g, 1).unwrap();
        assert_eq!(d.pair_map.len(), 3);
        assert!(d.pair_map.values().all(|&w| w == 3));
        assert_eq!(d.params, src);
    }

    #[test]
    fn complete_graph_is_infeasible() {
        let g = Graph::new(3, [(0, 1), (1, 2), (0, 2)], Matrix::<f64>::zeros(3, 2)).unwrap();
        assert!(matches!(sample_pair_map(&g, &[0], 0), Err(Error::Infeasible { .. })));
    }

    #[test]
    fn mapped_pairs_are_never_edges() {
        let g: Graph<f64> = generate_sbm(4, 25, 0.3, 0.02, 4, 2).unwrap();
        let nodes: Vec<usize> = (0..g.num_nodes()).collect();
        let mut checked = 0;
        for s in 0..10 {
            let m = sample_pair_map(&g, &nodes, s).unwrap();
            for (&u, &w) in &m {
                assert_ne!(u, w);
                assert!(!g.has_edge(u, w));
                checked += 1;
            }
        }
        assert_eq!(checked, 1000);
    }

    #[test]
    fn negative_pairs_cover_forget_endpoints() {
        let g: Graph<f64> = generate_sbm(3, 15, 0.4, 0.02, 4, 4).unwrap();
        let s: EdgeSplit = split_edges(&g, 0.1, 0.1, 4).unwrap();
        let f = sample_forget_edges(&g, &s, 0.1, Locality::In, 4).unwrap();
        let src = init_params::<f64>(Arch::Gcn, &[4, 4], 0).unwrap();
        let d = make_destroyer(DestroyerKind::NegativePairs, &src, &f, &g, 4).unwrap();
        assert_eq!(d.pair_map.keys().copied().collect::<Vec<_>>(), f.forget_endpoints());
    }

    #[test]
    fn kind_parsing() {
        assert_eq!("negative".parse::<DestroyerKind>().unwrap(), DestroyerKind::NegativePairs);
        assert_eq!("random".parse::<DestroyerKind>().unwrap(), DestroyerKind::RandomInit);
        assert!("other".parse::<DestroyerKind>().is_err());
    }
}

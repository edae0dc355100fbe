use std::collections::HashSet;

use rand::seq::index;
use rand::seq::SliceRandom;
use rand::Rng as _;

use super::{canonical, Edge, Graph};
use crate::error::{Error, Result};
use crate::rng::rng_for;
use crate::scalar::Scalar;

/// Train/validation/test partition of a graph's edges, with sampled
/// non-edges for the evaluation splits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeSplit {
    pub train: Vec<Edge>,
    pub val: Vec<Edge>,
    pub test: Vec<Edge>,
    pub val_neg: Vec<Edge>,
    pub test_neg: Vec<Edge>,
}

pub fn split_edges<T: Scalar>(graph: &Graph<T>, val_frac: f64, test_frac: f64, seed: u64) -> Result<EdgeSplit> {
    if graph.num_edges() == 0 {
        return Err(Error::EmptyGraph);
    }
    if !(val_frac >= 0.0 && test_frac >= 0.0 && val_frac + test_frac < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "split fractions must be non-negative with sum < 1 (val {val_frac}, test {test_frac})"
        )));
    }
    let m = graph.num_edges();
    let n_val = (val_frac * m as f64).round() as usize;
    let n_test = ((test_frac * m as f64).round() as usize).min(m - n_val);

    let mut shuffled = graph.edges().to_vec();
    shuffled.shuffle(&mut rng_for(seed, "split", 0));
    let mut val = shuffled[..n_val].to_vec();
    let mut test = shuffled[n_val..n_val + n_test].to_vec();
    let mut train = shuffled[n_val + n_test..].to_vec();
    val.sort_unstable();
    test.sort_unstable();
    train.sort_unstable();

    let val_neg = sample_negatives(graph, val.len(), &[], crate::rng::derive_seed(seed, "val-neg", 0))?;
    let test_neg = sample_negatives(graph, test.len(), &val_neg, crate::rng::derive_seed(seed, "test-neg", 0))?;
    Ok(EdgeSplit {
        train,
        val,
        test,
        val_neg,
        test_neg,
    })
}

/// Draws `count` distinct unordered node pairs that are neither self-pairs,
/// graph edges, nor members of `exclude`.
pub fn sample_negatives<T: Scalar>(graph: &Graph<T>, count: usize, exclude: &[Edge], seed: u64) -> Result<Vec<Edge>> {
    let n = graph.num_nodes();
    let total = n * n.saturating_sub(1) / 2;
    let is_forbidden = |e: Edge| graph.has_edge(e.0, e.1);
    let mut extra: HashSet<Edge> = HashSet::new();
    for &(u, v) in exclude {
        if u != v && u < n && v < n {
            let e = canonical(u, v);
            if !is_forbidden(e) {
                extra.insert(e);
            }
        }
    }
    let available = total - graph.num_edges() - extra.len();
    if count > available {
        return Err(Error::Infeasible {
            what: "negative pairs",
            requested: count,
            available,
        });
    }
    let mut rng = rng_for(seed, "negatives", 0);

    if count * 2 > available {
        let mut pool = Vec::with_capacity(available);
        for u in 0..n {
            for v in (u + 1)..n {
                if !is_forbidden((u, v)) && !extra.contains(&(u, v)) {
                    pool.push((u, v));
                }
            }
        }
        return Ok(index::sample(&mut rng, pool.len(), count)
            .into_iter()
            .map(|i| pool[i])
            .collect());
    }

    let mut chosen = HashSet::with_capacity(count);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u == v {
            continue;
        }
        let e = canonical(u, v);
        if is_forbidden(e) || extra.contains(&e) || !chosen.insert(e) {
            continue;
        }
        out.push(e);
    }
    Ok(out)
}

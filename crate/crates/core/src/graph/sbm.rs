use rand::Rng as _;

use super::Graph;
use crate::error::{Error, Result};
use crate::nn::tensor::Matrix;
use crate::rng::rng_for;
use crate::scalar::Scalar;

/// Stochastic block model with equal-size blocks.
///
/// Node `i` belongs to block `i / nodes_per_block`. Every unordered pair is
/// visited once in lexicographic order and kept with probability `p_in`
/// (same block) or `p_out`. Features are the block one-hot (column
/// `block % feature_dim`) plus uniform noise in `[0, 0.1)`.
pub fn generate_sbm<T: Scalar>(
    num_blocks: usize,
    nodes_per_block: usize,
    p_in: f64,
    p_out: f64,
    feature_dim: usize,
    seed: u64,
) -> Result<Graph<T>> {
    for (name, p) in [("p_in", p_in), ("p_out", p_out)] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!("{name} = {p} is not a probability")));
        }
    }
    if p_out > p_in {
        return Err(Error::InvalidArgument(format!("p_out ({p_out}) exceeds p_in ({p_in})")));
    }
    if num_blocks == 0 || nodes_per_block == 0 || feature_dim == 0 {
        return Err(Error::InvalidArgument("block count, block size and feature_dim must be >= 1".into()));
    }
    let n = num_blocks * nodes_per_block;
    let block = |i: usize| i / nodes_per_block;

    let mut rng = rng_for(seed, "sbm-edges", 0);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            let p = if block(u) == block(v) { p_in } else { p_out };
            if rng.gen::<f64>() < p {
                edges.push((u, v));
            }
        }
    }

    let mut rng = rng_for(seed, "sbm-features", 0);
    let mut features = Matrix::zeros(n, feature_dim);
    for i in 0..n {
        for x in features.row_mut(i) {
            *x = T::lit(rng.gen_range(0.0..0.1));
        }
        features[(i, block(i) % feature_dim)] += T::one();
    }
    Graph::new(n, edges, features)
}

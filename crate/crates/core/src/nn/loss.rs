//! Edge scoring and the three losses, evaluated on plain values.
//!
//! The tape versions in [`crate::nn::tape`] reuse these for their forward
//! values, so both paths agree bit for bit.

use crate::error::{Error, Result};
use crate::nn::model::LayerEmbeddings;
use crate::nn::tape::{mse_rows_value, sigmoid};
use crate::nn::tensor::{dot, Matrix};
use crate::scalar::Scalar;
use crate::Edge;

/// Floor applied to every probability before it reaches a logarithm.
pub const PROB_EPS: f64 = 1e-12;

#[inline]
pub fn clamp_prob<T: Scalar>(p: T) -> T {
    let eps = T::lit(PROB_EPS);
    p.max(eps).min(T::one() - eps)
}

/// Logits `⟨h_u, h_v⟩` and tempered probabilities `σ(z / T)` for each pair.
pub fn score_edges<T: Scalar>(
    last_embed: &Matrix<T>,
    pairs: &[Edge],
    temperature: T,
) -> Result<(Vec<T>, Vec<T>)> {
    if !(temperature > T::zero()) {
        return Err(Error::InvalidArgument(format!(
            "temperature must be positive, got {temperature}"
        )));
    }
    let n = last_embed.rows();
    let mut logits = Vec::with_capacity(pairs.len());
    for &(u, v) in pairs {
        if u >= n || v >= n {
            return Err(Error::InvalidNode {
                id: u.max(v),
                num_nodes: n,
            });
        }
        logits.push(dot(last_embed.row(u), last_embed.row(v)));
    }
    let probs = logits.iter().map(|&z| sigmoid(z / temperature)).collect();
    Ok((logits, probs))
}

pub fn bce_loss<T: Scalar>(probabilities: &[T], labels: &[T]) -> Result<T> {
    if probabilities.len() != labels.len() {
        return Err(Error::shape("bce_loss", probabilities.len(), labels.len()));
    }
    if probabilities.is_empty() {
        return Ok(T::zero());
    }
    let total = probabilities
        .iter()
        .zip(labels)
        .fold(T::zero(), |acc, (&p, &y)| {
            let p = clamp_prob(p);
            acc - (y * p.ln() + (T::one() - y) * (T::one() - p).ln())
        });
    Ok(total / T::from_usize(labels.len()).expect("length fits scalar"))
}

/// Mean Bernoulli KL divergence `KL(target ‖ model)`.
pub fn kl_bernoulli<T: Scalar>(target_p: &[T], model_q: &[T]) -> Result<T> {
    if target_p.len() != model_q.len() {
        return Err(Error::shape("kl_bernoulli", target_p.len(), model_q.len()));
    }
    if target_p.is_empty() {
        return Ok(T::zero());
    }
    let total = target_p.iter().zip(model_q).fold(T::zero(), |acc, (&p, &q)| {
        let (p, q) = (clamp_prob(p), clamp_prob(q));
        let (np, nq) = (T::one() - p, T::one() - q);
        acc + p * (p / q).ln() + np * (np / nq).ln()
    });
    Ok(total / T::from_usize(target_p.len()).expect("length fits scalar"))
}

/// Sum over layers of the mean squared difference on the selected rows.
pub fn mse_embeddings<T: Scalar>(
    a: &LayerEmbeddings<T>,
    b: &LayerEmbeddings<T>,
    rows: &[usize],
) -> Result<T> {
    if a.len() != b.len() {
        return Err(Error::shape("mse_embeddings layers", a.len(), b.len()));
    }
    let mut total = T::zero();
    for (ha, hb) in a.layers().iter().zip(b.layers()) {
        if ha.shape() != hb.shape() {
            return Err(Error::shape(
                "mse_embeddings",
                format!("{:?}", ha.shape()),
                format!("{:?}", hb.shape()),
            ));
        }
        if let Some(&r) = rows.iter().find(|&&r| r >= ha.rows()) {
            return Err(Error::InvalidNode {
                id: r,
                num_nodes: ha.rows(),
            });
        }
        total += mse_rows_value(ha, hb, rows);
    }
    Ok(total)
}

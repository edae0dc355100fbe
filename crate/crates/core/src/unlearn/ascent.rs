use crate::error::{Error, Result};
use crate::graph::{EdgeSplit, ForgetSet, Graph};
use crate::nn::{adam_step, forward_on, ModelParams, OptState, Tape};
use crate::scalar::Scalar;
use crate::view::GraphView;

/// Baseline: maximize the cross-entropy of the forget edges labeled as
/// positives, propagating over the retained edges.
pub fn grad_ascent_unlearn<T: Scalar>(
    source: &ModelParams<T>,
    graph: &Graph<T>,
    _split: &EdgeSplit,
    forget: &ForgetSet,
    epochs: usize,
    lr: f64,
    _seed: u64,
) -> Result<ModelParams<T>> {
    if forget.forget.is_empty() {
        return Err(Error::EmptyForgetSet);
    }
    let mut params = source.clone();
    if epochs == 0 {
        return Ok(params);
    }
    let view = GraphView::retained(graph, forget)?;
    let labels = vec![T::one(); forget.forget.len()];
    let mut opt = OptState::new(&params);
    let lr = T::lit(lr);
    for epoch in 0..epochs {
        let mut tape = Tape::new();
        let weights = params.bind(&mut tape, true);
        let x = tape.constant(view.features.clone());
        let layers = forward_on(&mut tape, params.arch, &weights, &view.adj, x)?;
        let last = *layers.last().expect("at least one layer");
        let z = tape.edge_dot(last, &forget.forget)?;
        let p = tape.sigmoid(z, T::one());
        let bce = tape.bce(p, &labels)?;
        if !tape.value(bce).item().is_finite() {
            return Err(Error::Diverged {
                context: "gradient ascent loss",
                epoch,
            });
        }
        let loss = tape.scale(bce, -T::one());
        let mut grads = tape.backward(loss)?;
        let grads = grads.collect(&weights);
        adam_step(&mut params, &grads, &mut opt, lr)?;
    }
    Ok(params)
}

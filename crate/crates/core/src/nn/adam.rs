use crate::error::{Error, Result};
use crate::nn::model::ModelParams;
use crate::nn::tensor::Matrix;
use crate::scalar::Scalar;

/// Moment accumulators for [`adam_step`].
#[derive(Debug, Clone, PartialEq)]
pub struct OptState<T> {
    pub first: Vec<Matrix<T>>,
    pub second: Vec<Matrix<T>>,
    pub step: u64,
    pub beta1: T,
    pub beta2: T,
    pub eps: T,
}

impl<T: Scalar> OptState<T> {
    /// Zeroed state with β1 = 0.9, β2 = 0.999, ε = 1e-8.
    pub fn new(params: &ModelParams<T>) -> Self {
        let zeros: Vec<Matrix<T>> = params
            .tensors
            .iter()
            .map(|t| Matrix::zeros(t.rows(), t.cols()))
            .collect();
        Self {
            first: zeros.clone(),
            second: zeros,
            step: 0,
            beta1: T::lit(0.9),
            beta2: T::lit(0.999),
            eps: T::lit(1e-8),
        }
    }
}

/// Bias-corrected Adam update, in place. Nothing is modified if any gradient
/// entry is non-finite.
pub fn adam_step<T: Scalar>(
    params: &mut ModelParams<T>,
    grads: &[Matrix<T>],
    state: &mut OptState<T>,
    lr: T,
) -> Result<()> {
    if grads.len() != params.tensors.len() || state.first.len() != params.tensors.len() {
        return Err(Error::shape("adam tensors", params.tensors.len(), grads.len()));
    }
    for (i, (g, p)) in grads.iter().zip(&params.tensors).enumerate() {
        if g.shape() != p.shape() {
            return Err(Error::shape("adam gradient", format!("{:?}", p.shape()), format!("{:?}", g.shape())));
        }
        if !g.is_finite() {
            return Err(Error::NonFiniteGradient { tensor: i });
        }
    }

    state.step += 1;
    let t = i32::try_from(state.step).unwrap_or(i32::MAX);
    let (b1, b2) = (state.beta1, state.beta2);
    let correction1 = T::one() - b1.powi(t);
    let correction2 = T::one() - b2.powi(t);
    for (((p, g), m), v) in params
        .tensors
        .iter_mut()
        .zip(grads)
        .zip(&mut state.first)
        .zip(&mut state.second)
    {
        for (((pi, &gi), mi), vi) in p
            .as_mut_slice()
            .iter_mut()
            .zip(g.as_slice())
            .zip(m.as_mut_slice())
            .zip(v.as_mut_slice())
        {
            *mi = b1 * *mi + (T::one() - b1) * gi;
            *vi = b2 * *vi + (T::one() - b2) * gi * gi;
            let m_hat = *mi / correction1;
            let v_hat = *vi / correction2;
            *pi -= lr * m_hat / (v_hat.sqrt() + state.eps);
        }
    }
    Ok(())
}

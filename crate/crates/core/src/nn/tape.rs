//! Matrix-valued reverse-mode differentiation.
//!
//! A [`Tape`] records every operation of a forward pass together with its
//! output value. [`Tape::backward`] then walks the records in reverse and
//! accumulates adjoints for every node that depends on a trainable leaf.
//! The operator set is closed: dense and sparse products, ReLU, sums and
//! scalings, the inner-product edge decoder, the tempered sigmoid and the
//! three training losses.

use crate::error::{Error, Result};
use crate::nn::loss::clamp_prob;
use crate::nn::tensor::{dot, CsrMatrix, Matrix};
use crate::scalar::Scalar;
use crate::Edge;

/// Handle to a node on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(usize);

enum Op<'a, T> {
    Leaf,
    MatMul(Var, Var),
    SpMatMul(&'a CsrMatrix<T>, Var),
    Add(Var, Var),
    /// `s * x` where `s` is a 1x1 node.
    ScalarMul(Var, Var),
    Scale(Var, T),
    Relu(Var),
    Sum(Var),
    EdgeDot(Var, Vec<Edge>),
    Sigmoid(Var, T),
    Bce(Var, Vec<T>),
    Kl(Var, Vec<T>),
    MseRows(Var, Matrix<T>, Vec<usize>),
}

struct Node<'a, T> {
    value: Matrix<T>,
    op: Op<'a, T>,
    tracked: bool,
}

pub struct Tape<'a, T> {
    nodes: Vec<Node<'a, T>>,
}

/// Adjoints produced by [`Tape::backward`].
pub struct Gradients<T> {
    grads: Vec<Option<Matrix<T>>>,
    shapes: Vec<Option<(usize, usize)>>,
}

impl<T: Scalar> Gradients<T> {
    /// Gradient for `v`. Tracked nodes the loss does not depend on get an
    /// all-zero matrix; constants get `None`.
    pub fn get(&self, v: Var) -> Option<Matrix<T>> {
        match (&self.grads[v.0], self.shapes[v.0]) {
            (Some(g), _) => Some(g.clone()),
            (None, Some((r, c))) => Some(Matrix::zeros(r, c)),
            (None, None) => None,
        }
    }

    /// Gradients for a list of trainable leaves, in order.
    pub fn collect(&mut self, vars: &[Var]) -> Vec<Matrix<T>> {
        vars.iter()
            .map(|&v| self.take(v).expect("collect called on trainable leaves"))
            .collect()
    }

    pub fn take(&mut self, v: Var) -> Option<Matrix<T>> {
        match (self.grads[v.0].take(), self.shapes[v.0]) {
            (Some(g), _) => Some(g),
            (None, Some((r, c))) => Some(Matrix::zeros(r, c)),
            (None, None) => None,
        }
    }
}

impl<'a, T: Scalar> Default for Tape<'a, T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<'a, T: Scalar> Tape<'a, T> {
    pub fn new() -> Self {
        Self { nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, value: Matrix<T>, op: Op<'a, T>, tracked: bool) -> Var {
        self.nodes.push(Node { value, op, tracked });
        Var(self.nodes.len() - 1)
    }

    fn tracked(&self, v: Var) -> bool {
        self.nodes[v.0].tracked
    }

    pub fn value(&self, v: Var) -> &Matrix<T> {
        &self.nodes[v.0].value
    }

    /// Trainable leaf.
    pub fn param(&mut self, value: Matrix<T>) -> Var {
        self.push(value, Op::Leaf, true)
    }

    /// Leaf that never receives a gradient.
    pub fn constant(&mut self, value: Matrix<T>) -> Var {
        self.push(value, Op::Leaf, false)
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let value = self.value(a).matmul(self.value(b))?;
        let tracked = self.tracked(a) || self.tracked(b);
        Ok(self.push(value, Op::MatMul(a, b), tracked))
    }

    pub fn spmm(&mut self, adj: &'a CsrMatrix<T>, x: Var) -> Result<Var> {
        let value = adj.matmul(self.value(x))?;
        let tracked = self.tracked(x);
        Ok(self.push(value, Op::SpMatMul(adj, x), tracked))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let (va, vb) = (self.value(a), self.value(b));
        if va.shape() != vb.shape() {
            return Err(Error::shape(
                "add",
                format!("{:?}", va.shape()),
                format!("{:?}", vb.shape()),
            ));
        }
        let value = va.zip_map(vb, |x, y| x + y);
        let tracked = self.tracked(a) || self.tracked(b);
        Ok(self.push(value, Op::Add(a, b), tracked))
    }

    pub fn scalar_mul(&mut self, s: Var, x: Var) -> Result<Var> {
        if self.value(s).shape() != (1, 1) {
            return Err(Error::shape("scalar_mul", "1x1", format!("{:?}", self.value(s).shape())));
        }
        let k = self.value(s).item();
        let value = self.value(x).scale(k);
        let tracked = self.tracked(s) || self.tracked(x);
        Ok(self.push(value, Op::ScalarMul(s, x), tracked))
    }

    pub fn scale(&mut self, x: Var, k: T) -> Var {
        let value = self.value(x).scale(k);
        let tracked = self.tracked(x);
        self.push(value, Op::Scale(x, k), tracked)
    }

    pub fn relu(&mut self, x: Var) -> Var {
        let value = self.value(x).map(|v| if v > T::zero() { v } else { T::zero() });
        let tracked = self.tracked(x);
        self.push(value, Op::Relu(x), tracked)
    }

    pub fn sum(&mut self, x: Var) -> Var {
        let value = Matrix::scalar(self.value(x).sum());
        let tracked = self.tracked(x);
        self.push(value, Op::Sum(x), tracked)
    }

    /// Inner-product decoder: one logit `⟨h_u, h_v⟩` per pair, as a column.
    pub fn edge_dot(&mut self, h: Var, pairs: &[Edge]) -> Result<Var> {
        let hv = self.value(h);
        if let Some(&(u, v)) = pairs.iter().find(|&&(u, v)| u.max(v) >= hv.rows()) {
            return Err(Error::InvalidNode {
                id: u.max(v),
                num_nodes: hv.rows(),
            });
        }
        let logits: Vec<T> = pairs.iter().map(|&(u, v)| dot(hv.row(u), hv.row(v))).collect();
        let value = Matrix::from_vec(pairs.len(), 1, logits)?;
        let tracked = self.tracked(h);
        Ok(self.push(value, Op::EdgeDot(h, pairs.to_vec()), tracked))
    }

    /// `σ(z / temperature)`
    pub fn sigmoid(&mut self, z: Var, temperature: T) -> Var {
        let value = self.value(z).map(|x| sigmoid(x / temperature));
        let tracked = self.tracked(z);
        self.push(value, Op::Sigmoid(z, temperature), tracked)
    }

    /// Mean binary cross-entropy of a probability column against 0/1 labels.
    pub fn bce(&mut self, p: Var, labels: &[T]) -> Result<Var> {
        let pv = self.value(p).as_slice();
        if pv.len() != labels.len() {
            return Err(Error::shape("bce", pv.len(), labels.len()));
        }
        let value = Matrix::scalar(crate::nn::loss::bce_loss(pv, labels)?);
        let tracked = self.tracked(p);
        Ok(self.push(value, Op::Bce(p, labels.to_vec()), tracked))
    }

    /// Mean Bernoulli KL(target ‖ q); the target side is a constant.
    pub fn kl(&mut self, q: Var, target: &[T]) -> Result<Var> {
        let qv = self.value(q).as_slice();
        if qv.len() != target.len() {
            return Err(Error::shape("kl", target.len(), qv.len()));
        }
        let value = Matrix::scalar(crate::nn::loss::kl_bernoulli(target, qv)?);
        let tracked = self.tracked(q);
        Ok(self.push(value, Op::Kl(q, target.to_vec()), tracked))
    }

    /// Mean squared difference between `x` and a constant target, over the
    /// given rows only.
    pub fn mse_rows(&mut self, x: Var, target: Matrix<T>, rows: &[usize]) -> Result<Var> {
        let xv = self.value(x);
        if xv.shape() != target.shape() {
            return Err(Error::shape(
                "mse_rows",
                format!("{:?}", target.shape()),
                format!("{:?}", xv.shape()),
            ));
        }
        if let Some(&r) = rows.iter().find(|&&r| r >= xv.rows()) {
            return Err(Error::InvalidNode {
                id: r,
                num_nodes: xv.rows(),
            });
        }
        let value = Matrix::scalar(mse_rows_value(xv, &target, rows));
        let tracked = self.tracked(x);
        Ok(self.push(value, Op::MseRows(x, target, rows.to_vec()), tracked))
    }

    /// Reverse sweep from a scalar `loss`.
    pub fn backward(&self, loss: Var) -> Result<Gradients<T>> {
        let (r, c) = self.value(loss).shape();
        if (r, c) != (1, 1) {
            return Err(Error::NonScalarLoss { rows: r, cols: c });
        }
        let n = self.nodes.len();
        let mut grads: Vec<Option<Matrix<T>>> = (0..n).map(|_| None).collect();
        if self.tracked(loss) {
            grads[loss.0] = Some(Matrix::scalar(T::one()));
        }
        for idx in (0..=loss.0).rev() {
            let Some(g) = grads[idx].take() else { continue };
            let node = &self.nodes[idx];
            self.propagate(node, &g, &mut grads);
            grads[idx] = Some(g);
        }
        let shapes = self
            .nodes
            .iter()
            .map(|n| n.tracked.then(|| n.value.shape()))
            .collect();
        Ok(Gradients { grads, shapes })
    }

    fn accumulate(&self, grads: &mut [Option<Matrix<T>>], v: Var, g: Matrix<T>) {
        if !self.tracked(v) {
            return;
        }
        match &mut grads[v.0] {
            Some(acc) => acc.add_assign(&g),
            slot @ None => *slot = Some(g),
        }
    }

    fn propagate(&self, node: &Node<'a, T>, g: &Matrix<T>, grads: &mut [Option<Matrix<T>>]) {
        match &node.op {
            Op::Leaf => {}
            Op::MatMul(a, b) => {
                if self.tracked(*a) {
                    self.accumulate(grads, *a, g.matmul_t(self.value(*b)));
                }
                if self.tracked(*b) {
                    self.accumulate(grads, *b, self.value(*a).t_matmul(g));
                }
            }
            Op::SpMatMul(adj, x) => {
                self.accumulate(grads, *x, adj.t_matmul(g));
            }
            Op::Add(a, b) => {
                self.accumulate(grads, *a, g.clone());
                self.accumulate(grads, *b, g.clone());
            }
            Op::ScalarMul(s, x) => {
                if self.tracked(*s) {
                    let gs = dot(g.as_slice(), self.value(*x).as_slice());
                    self.accumulate(grads, *s, Matrix::scalar(gs));
                }
                if self.tracked(*x) {
                    self.accumulate(grads, *x, g.scale(self.value(*s).item()));
                }
            }
            Op::Scale(x, k) => self.accumulate(grads, *x, g.scale(*k)),
            Op::Relu(x) => {
                let gx = g.zip_map(&node.value, |gi, out| if out > T::zero() { gi } else { T::zero() });
                self.accumulate(grads, *x, gx);
            }
            Op::Sum(x) => {
                let (r, c) = self.value(*x).shape();
                self.accumulate(grads, *x, Matrix::filled(r, c, g.item()));
            }
            Op::EdgeDot(h, pairs) => {
                let hv = self.value(*h);
                let mut gh = Matrix::zeros(hv.rows(), hv.cols());
                for (k, &(u, v)) in pairs.iter().enumerate() {
                    let gk = g.as_slice()[k];
                    if gk == T::zero() {
                        continue;
                    }
                    for j in 0..hv.cols() {
                        let (hu, hvv) = (hv[(u, j)], hv[(v, j)]);
                        gh[(u, j)] += gk * hvv;
                        gh[(v, j)] += gk * hu;
                    }
                }
                self.accumulate(grads, *h, gh);
            }
            Op::Sigmoid(z, t) => {
                let t = *t;
                let gz = g.zip_map(&node.value, |gi, p| gi * p * (T::one() - p) / t);
                self.accumulate(grads, *z, gz);
            }
            Op::Bce(p, labels) => {
                let pv = self.value(*p);
                let n = T::from_usize(labels.len()).expect("length fits scalar");
                let scale = g.item() / n;
                let data = pv
                    .as_slice()
                    .iter()
                    .zip(labels)
                    .map(|(&pi, &y)| {
                        let pc = clamp_prob(pi);
                        scale * (-(y / pc) + (T::one() - y) / (T::one() - pc))
                    })
                    .collect();
                let gp = Matrix::from_vec(pv.rows(), pv.cols(), data).expect("shape preserved");
                self.accumulate(grads, *p, gp);
            }
            Op::Kl(q, target) => {
                let qv = self.value(*q);
                let n = T::from_usize(target.len()).expect("length fits scalar");
                let scale = g.item() / n;
                let data = qv
                    .as_slice()
                    .iter()
                    .zip(target)
                    .map(|(&qi, &pi)| {
                        let (pc, qc) = (clamp_prob(pi), clamp_prob(qi));
                        scale * (-(pc / qc) + (T::one() - pc) / (T::one() - qc))
                    })
                    .collect();
                let gq = Matrix::from_vec(qv.rows(), qv.cols(), data).expect("shape preserved");
                self.accumulate(grads, *q, gq);
            }
            Op::MseRows(x, target, rows) => {
                let xv = self.value(*x);
                let mut gx = Matrix::zeros(xv.rows(), xv.cols());
                if !rows.is_empty() && xv.cols() > 0 {
                    let n = T::from_usize(rows.len() * xv.cols()).expect("count fits scalar");
                    let scale = g.item() * T::lit(2.0) / n;
                    for &r in rows {
                        for j in 0..xv.cols() {
                            gx[(r, j)] += scale * (xv[(r, j)] - target[(r, j)]);
                        }
                    }
                }
                self.accumulate(grads, *x, gx);
            }
        }
    }
}

#[inline]
pub fn sigmoid<T: Scalar>(x: T) -> T {
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

pub(crate) fn mse_rows_value<T: Scalar>(x: &Matrix<T>, target: &Matrix<T>, rows: &[usize]) -> T {
    if rows.is_empty() || x.cols() == 0 {
        return T::zero();
    }
    let mut acc = T::zero();
    for &r in rows {
        for (&a, &b) in x.row(r).iter().zip(target.row(r)) {
            let d = a - b;
            acc += d * d;
        }
    }
    acc / T::from_usize(rows.len() * x.cols()).expect("count fits scalar")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sum_has_all_ones_gradient() {
        let mut tape = Tape::<f64>::new();
        let w = tape.param(Matrix::from_vec(2, 3, vec![1.0, -2.0, 3.0, 0.5, 0.0, 4.0]).unwrap());
        let s = tape.sum(w);
        let g = tape.backward(s).unwrap();
        assert_eq!(g.get(w).unwrap(), Matrix::filled(2, 3, 1.0));
    }

    #[test]
    fn independent_param_gets_zero_gradient() {
        let mut tape = Tape::<f64>::new();
        let a = tape.param(Matrix::filled(2, 2, 1.5));
        let b = tape.param(Matrix::filled(3, 1, 2.0));
        let s = tape.sum(a);
        let g = tape.backward(s).unwrap();
        assert_eq!(g.get(b).unwrap(), Matrix::zeros(3, 1));
    }

    #[test]
    fn constants_get_no_gradient() {
        let mut tape = Tape::<f64>::new();
        let c = tape.constant(Matrix::filled(2, 2, 1.0));
        let w = tape.param(Matrix::filled(2, 2, 1.0));
        let y = tape.matmul(c, w).unwrap();
        let s = tape.sum(y);
        let g = tape.backward(s).unwrap();
        assert!(g.get(c).is_none());
        assert_eq!(g.get(w).unwrap(), Matrix::filled(2, 2, 2.0));
    }

    #[test]
    fn non_scalar_loss_rejected() {
        let mut tape = Tape::<f64>::new();
        let w = tape.param(Matrix::filled(2, 2, 1.0));
        assert!(matches!(
            tape.backward(w),
            Err(Error::NonScalarLoss { rows: 2, cols: 2 })
        ));
    }

    #[test]
    fn scalar_mul_gradients() {
        let mut tape = Tape::<f64>::new();
        let s = tape.param(Matrix::scalar(3.0));
        let x = tape.param(Matrix::from_vec(1, 2, vec![1.0, 2.0]).unwrap());
        let y = tape.scalar_mul(s, x).unwrap();
        let l = tape.sum(y);
        let g = tape.backward(l).unwrap();
        assert_eq!(g.get(s).unwrap().item(), 3.0);
        assert_eq!(g.get(x).unwrap().as_slice(), &[3.0, 3.0]);
    }
}

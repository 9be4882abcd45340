//! Reverse-mode automatic differentiation over dense f64 tensors.
//!
//! A [`Graph`] is an append-only tape: every forward operation records its
//! inputs and output value, and [`Graph::backward`] replays the tape in
//! reverse to accumulate adjoints. One graph serves one forward/backward
//! pass; training builds a fresh graph per step.

use rand::Rng;

use crate::error::{Error, Result};
use crate::kernels;
use crate::tensor::Tensor;

/// Index of a recorded tensor on the tape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NodeId(usize);

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    Add(NodeId, NodeId),
    /// `[r,c] + [c]`, the vector broadcast over rows.
    AddRowVec(NodeId, NodeId),
    Mul(NodeId, NodeId),
    Scale(NodeId, f64),
    /// `a @ b` with `a: [m,k]`, `b: [k,n]`.
    MatMul(NodeId, NodeId),
    /// `a @ b^T` with `a: [m,k]`, `b: [n,k]`.
    MatMulNT(NodeId, NodeId),
    SliceCols {
        input: NodeId,
        start: usize,
        len: usize,
    },
    ConcatCols(Vec<NodeId>),
    /// Each row rescaled to norm `sqrt(ncols)`.
    RowNormalize(NodeId),
    Gelu(NodeId),
    Softmax {
        input: NodeId,
        axis: usize,
        mask: Option<Vec<bool>>,
    },
    LayerNorm {
        input: NodeId,
        gain: NodeId,
        bias: NodeId,
        eps: f64,
    },
    Dropout {
        input: NodeId,
        mask: Vec<f64>,
    },
    Sum(NodeId),
    /// Summed token-level cross-entropy of `logits: [n,c]` against class
    /// indices; the mean is obtained with a `Scale` on top.
    CrossEntropySum {
        logits: NodeId,
        targets: Vec<usize>,
    },
}

struct Node {
    value: Tensor,
    op: Op,
}

/// The recorded computation: values plus enough operation context to
/// replay adjoints in reverse topological order.
#[derive(Default)]
pub struct Graph {
    nodes: Vec<Node>,
}

/// Adjoints produced by [`Graph::backward`], indexed by node.
pub struct Gradients {
    grads: Vec<Option<Vec<f64>>>,
}

impl Gradients {
    /// Gradient buffer for `id`, or `None` when the node does not reach
    /// the loss (its gradient is identically zero).
    pub fn get(&self, id: NodeId) -> Option<&[f64]> {
        self.grads[id.0].as_deref()
    }

    pub fn take(&mut self, id: NodeId) -> Option<Vec<f64>> {
        self.grads[id.0].take()
    }
}

fn rows_cols(t: &Tensor) -> Result<(usize, usize)> {
    if t.shape().len() != 2 {
        return Err(Error::Shape(format!(
            "expected 2-d tensor, got shape {:?}",
            t.shape()
        )));
    }
    Ok((t.shape()[0], t.shape()[1]))
}

impl Graph {
    pub fn new() -> Self {
        Graph::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, id: NodeId) -> &Tensor {
        &self.nodes[id.0].value
    }

    fn push(&mut self, value: Tensor, op: Op) -> NodeId {
        let id = NodeId(self.nodes.len());
        self.nodes.push(Node { value, op });
        id
    }

    pub fn leaf(&mut self, value: Tensor) -> NodeId {
        self.push(value, Op::Leaf)
    }

    pub fn leaf_from(&mut self, shape: Vec<usize>, data: Vec<f64>) -> Result<NodeId> {
        Ok(self.leaf(Tensor::new(shape, data)?))
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let (ta, tb) = (self.value(a), self.value(b));
        if ta.shape() != tb.shape() {
            return Err(Error::Shape(format!(
                "add: {:?} vs {:?}",
                ta.shape(),
                tb.shape()
            )));
        }
        let data: Vec<f64> = ta
            .data()
            .iter()
            .zip(tb.data())
            .map(|(x, y)| x + y)
            .collect();
        let t = Tensor::new(ta.shape().to_vec(), data)?;
        Ok(self.push(t, Op::Add(a, b)))
    }

    pub fn add_row_vec(&mut self, a: NodeId, v: NodeId) -> Result<NodeId> {
        let (r, c) = rows_cols(self.value(a))?;
        if self.value(v).shape() != [c] {
            return Err(Error::Shape(format!(
                "add_row_vec: matrix [{r},{c}] vs vector {:?}",
                self.value(v).shape()
            )));
        }
        let mut data = self.value(a).data().to_vec();
        let vd = self.value(v).data();
        for i in 0..r {
            for j in 0..c {
                data[i * c + j] += vd[j];
            }
        }
        let t = Tensor::new(vec![r, c], data)?;
        Ok(self.push(t, Op::AddRowVec(a, v)))
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let (ta, tb) = (self.value(a), self.value(b));
        if ta.shape() != tb.shape() {
            return Err(Error::Shape(format!(
                "mul: {:?} vs {:?}",
                ta.shape(),
                tb.shape()
            )));
        }
        let data: Vec<f64> = ta
            .data()
            .iter()
            .zip(tb.data())
            .map(|(x, y)| x * y)
            .collect();
        let t = Tensor::new(ta.shape().to_vec(), data)?;
        Ok(self.push(t, Op::Mul(a, b)))
    }

    pub fn scale(&mut self, a: NodeId, k: f64) -> NodeId {
        let ta = self.value(a);
        let data: Vec<f64> = ta.data().iter().map(|x| x * k).collect();
        let t = Tensor::new(ta.shape().to_vec(), data).expect("same shape");
        self.push(t, Op::Scale(a, k))
    }

    pub fn matmul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let (m, k) = rows_cols(self.value(a))?;
        let (k2, n) = rows_cols(self.value(b))?;
        if k != k2 {
            return Err(Error::Shape(format!("matmul: [{m},{k}] @ [{k2},{n}]")));
        }
        let data = kernels::matmul(self.value(a).data(), self.value(b).data(), m, k, n);
        let t = Tensor::new(vec![m, n], data)?;
        Ok(self.push(t, Op::MatMul(a, b)))
    }

    /// `a @ b^T`; `b` is given row-major as `[n, k]`.
    pub fn matmul_nt(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let (m, k) = rows_cols(self.value(a))?;
        let (n, k2) = rows_cols(self.value(b))?;
        if k != k2 {
            return Err(Error::Shape(format!("matmul_nt: [{m},{k}] @ [{n},{k2}]^T")));
        }
        let data = kernels::matmul_nt(self.value(a).data(), self.value(b).data(), m, k, n);
        let t = Tensor::new(vec![m, n], data)?;
        Ok(self.push(t, Op::MatMulNT(a, b)))
    }

    pub fn slice_cols(&mut self, input: NodeId, start: usize, len: usize) -> Result<NodeId> {
        let (r, c) = rows_cols(self.value(input))?;
        if start + len > c || len == 0 {
            return Err(Error::Shape(format!(
                "slice_cols: [{start}, {}) out of {c} columns",
                start + len
            )));
        }
        let src = self.value(input).data();
        let mut data = Vec::with_capacity(r * len);
        for i in 0..r {
            data.extend_from_slice(&src[i * c + start..i * c + start + len]);
        }
        let t = Tensor::new(vec![r, len], data)?;
        Ok(self.push(t, Op::SliceCols { input, start, len }))
    }

    pub fn concat_cols(&mut self, inputs: &[NodeId]) -> Result<NodeId> {
        if inputs.is_empty() {
            return Err(Error::Shape("concat_cols: no inputs".into()));
        }
        let r = rows_cols(self.value(inputs[0]))?.0;
        let mut widths = Vec::with_capacity(inputs.len());
        for &id in inputs {
            let (ri, ci) = rows_cols(self.value(id))?;
            if ri != r {
                return Err(Error::Shape(format!(
                    "concat_cols: row mismatch {ri} vs {r}"
                )));
            }
            widths.push(ci);
        }
        let total: usize = widths.iter().sum();
        let mut data = Vec::with_capacity(r * total);
        for i in 0..r {
            for (idx, &id) in inputs.iter().enumerate() {
                let c = widths[idx];
                let src = self.value(id).data();
                data.extend_from_slice(&src[i * c..(i + 1) * c]);
            }
        }
        let t = Tensor::new(vec![r, total], data)?;
        Ok(self.push(t, Op::ConcatCols(inputs.to_vec())))
    }

    /// Rescale every row to Euclidean norm `sqrt(ncols)`. A zero row has no
    /// direction to preserve and is rejected.
    pub fn row_normalize(&mut self, input: NodeId) -> Result<NodeId> {
        let (r, c) = rows_cols(self.value(input))?;
        let src = self.value(input).data();
        let target = (c as f64).sqrt();
        let mut data = Vec::with_capacity(r * c);
        for i in 0..r {
            let row = &src[i * c..(i + 1) * c];
            let norm = kernels::dot(row, row).sqrt();
            if norm == 0.0 {
                return Err(Error::InvalidArg(format!(
                    "row_normalize: zero vector at row {i}"
                )));
            }
            let s = target / norm;
            data.extend(row.iter().map(|v| v * s));
        }
        let t = Tensor::new(vec![r, c], data)?;
        Ok(self.push(t, Op::RowNormalize(input)))
    }

    pub fn gelu(&mut self, input: NodeId) -> Result<NodeId> {
        let ti = self.value(input);
        ti.ensure_finite("gelu input")?;
        let data: Vec<f64> = ti.data().iter().map(|&x| kernels::gelu(x)).collect();
        let t = Tensor::new(ti.shape().to_vec(), data)?;
        Ok(self.push(t, Op::Gelu(input)))
    }

    /// Softmax along `axis`, with optional mask (same shape as the input;
    /// `false` entries are filled with -inf before normalization and come
    /// out exactly zero). Each lane must keep at least one unmasked entry.
    pub fn softmax(&mut self, input: NodeId, axis: usize, mask: Option<Vec<bool>>) -> Result<NodeId> {
        let ti = self.value(input);
        ti.ensure_finite("softmax input")?;
        let shape = ti.shape().to_vec();
        if axis >= shape.len() {
            return Err(Error::Shape(format!(
                "softmax: axis {axis} out of rank {}",
                shape.len()
            )));
        }
        if let Some(m) = &mask {
            if m.len() != ti.numel() {
                return Err(Error::Shape("softmax: mask size mismatch".into()));
            }
        }
        let data = softmax_forward(ti.data(), &shape, axis, mask.as_deref())?;
        let t = Tensor::new(shape, data)?;
        Ok(self.push(t, Op::Softmax { input, axis, mask }))
    }

    /// Layer normalization over the last axis, then affine `gain * xhat + bias`.
    pub fn layer_norm(&mut self, input: NodeId, gain: NodeId, bias: NodeId, eps: f64) -> Result<NodeId> {
        let (r, c) = rows_cols(self.value(input))?;
        if c < 2 {
            return Err(Error::Shape(format!(
                "layer_norm: normalized axis length {c} < 2"
            )));
        }
        if self.value(gain).shape() != [c] || self.value(bias).shape() != [c] {
            return Err(Error::Shape("layer_norm: gain/bias must match last axis".into()));
        }
        let src = self.value(input).data();
        let g = self.value(gain).data();
        let b = self.value(bias).data();
        let mut data = Vec::with_capacity(r * c);
        for i in 0..r {
            let row = &src[i * c..(i + 1) * c];
            let (mean, rstd) = layer_norm_stats(row, eps);
            for j in 0..c {
                data.push((row[j] - mean) * rstd * g[j] + b[j]);
            }
        }
        let t = Tensor::new(vec![r, c], data)?;
        Ok(self.push(t, Op::LayerNorm { input, gain, bias, eps }))
    }

    /// Inverted-scaling Bernoulli dropout. Draws one keep decision per
    /// element from `rng`; kept entries are scaled by `1/(1-rate)`.
    pub fn dropout<R: Rng>(&mut self, input: NodeId, rate: f64, rng: &mut R) -> Result<NodeId> {
        if !(0.0..1.0).contains(&rate) {
            return Err(Error::InvalidArg(format!("dropout rate {rate} outside [0,1)")));
        }
        let ti = self.value(input);
        if rate == 0.0 {
            let t = ti.clone();
            let n = t.numel();
            return Ok(self.push(t, Op::Dropout { input, mask: vec![1.0; n] }));
        }
        let keep = 1.0 - rate;
        let inv = 1.0 / keep;
        let mask: Vec<f64> = (0..ti.numel())
            .map(|_| if rng.gen::<f64>() < keep { inv } else { 0.0 })
            .collect();
        let data: Vec<f64> = ti.data().iter().zip(&mask).map(|(x, m)| x * m).collect();
        let t = Tensor::new(ti.shape().to_vec(), data)?;
        Ok(self.push(t, Op::Dropout { input, mask }))
    }

    pub fn sum(&mut self, input: NodeId) -> NodeId {
        let s: f64 = self.value(input).data().iter().sum();
        self.push(Tensor::scalar(s), Op::Sum(input))
    }

    /// Sum over rows of `-log softmax(logits)[i, target_i]`.
    pub fn cross_entropy_sum(&mut self, logits: NodeId, targets: &[usize]) -> Result<NodeId> {
        let (n, c) = rows_cols(self.value(logits))?;
        if targets.len() != n {
            return Err(Error::Shape(format!(
                "cross_entropy: {n} logit rows vs {} targets",
                targets.len()
            )));
        }
        if let Some(&t) = targets.iter().find(|&&t| t >= c) {
            return Err(Error::InvalidArg(format!(
                "cross_entropy: target class {t} out of {c}"
            )));
        }
        let src = self.value(logits).data();
        let mut total = 0.0;
        let mut row = vec![0.0; c];
        for i in 0..n {
            row.copy_from_slice(&src[i * c..(i + 1) * c]);
            kernels::softmax_row_in_place(&mut row, None);
            total -= row[targets[i]].ln();
        }
        Ok(self.push(
            Tensor::scalar(total),
            Op::CrossEntropySum { logits, targets: targets.to_vec() },
        ))
    }

    /// Propagate adjoints from a scalar `loss` back to every reachable node.
    pub fn backward(&self, loss: NodeId) -> Result<Gradients> {
        if !self.value(loss).is_scalar() {
            return Err(Error::Shape(format!(
                "backward: loss must be scalar, got shape {:?}",
                self.value(loss).shape()
            )));
        }
        let mut grads: Vec<Option<Vec<f64>>> = vec![None; self.nodes.len()];
        grads[loss.0] = Some(vec![1.0]);

        for idx in (0..=loss.0).rev() {
            let Some(g) = grads[idx].take() else {
                continue;
            };
            self.accumulate(idx, &g, &mut grads);
            grads[idx] = Some(g);
        }
        Ok(Gradients { grads })
    }

    fn grad_buf<'a>(
        &self,
        grads: &'a mut Vec<Option<Vec<f64>>>,
        id: NodeId,
    ) -> &'a mut Vec<f64> {
        let numel = self.value(id).numel();
        grads[id.0].get_or_insert_with(|| vec![0.0; numel])
    }

    fn accumulate(&self, idx: usize, g: &[f64], grads: &mut Vec<Option<Vec<f64>>>) {
        match &self.nodes[idx].op {
            Op::Leaf => {}
            Op::Add(a, b) => {
                for (dst, &gv) in self.grad_buf(grads, *a).iter_mut().zip(g) {
                    *dst += gv;
                }
                for (dst, &gv) in self.grad_buf(grads, *b).iter_mut().zip(g) {
                    *dst += gv;
                }
            }
            Op::AddRowVec(a, v) => {
                for (dst, &gv) in self.grad_buf(grads, *a).iter_mut().zip(g) {
                    *dst += gv;
                }
                let c = self.value(*v).numel();
                let dv = self.grad_buf(grads, *v);
                for (i, &gv) in g.iter().enumerate() {
                    dv[i % c] += gv;
                }
            }
            Op::Mul(a, b) => {
                let (av, bv) = (self.value(*a).data().to_vec(), self.value(*b).data().to_vec());
                for ((dst, &gv), &x) in self.grad_buf(grads, *a).iter_mut().zip(g).zip(&bv) {
                    *dst += gv * x;
                }
                for ((dst, &gv), &x) in self.grad_buf(grads, *b).iter_mut().zip(g).zip(&av) {
                    *dst += gv * x;
                }
            }
            Op::Scale(a, k) => {
                let k = *k;
                for (dst, &gv) in self.grad_buf(grads, *a).iter_mut().zip(g) {
                    *dst += k * gv;
                }
            }
            Op::MatMul(a, b) => {
                let (m, k) = (self.value(*a).shape()[0], self.value(*a).shape()[1]);
                let n = self.value(*b).shape()[1];
                let bv = self.value(*b).data().to_vec();
                kernels::matmul_nt_acc(g, &bv, self.grad_buf(grads, *a), m, n, k);
                let av = self.value(*a).data().to_vec();
                kernels::matmul_tn_acc(&av, g, self.grad_buf(grads, *b), m, k, n);
            }
            Op::MatMulNT(a, b) => {
                let (m, k) = (self.value(*a).shape()[0], self.value(*a).shape()[1]);
                let n = self.value(*b).shape()[0];
                let bv = self.value(*b).data().to_vec();
                kernels::matmul_acc(g, &bv, self.grad_buf(grads, *a), m, n, k);
                let av = self.value(*a).data().to_vec();
                kernels::matmul_tn_acc(g, &av, self.grad_buf(grads, *b), m, n, k);
            }
            Op::SliceCols { input, start, len } => {
                let c = self.value(*input).shape()[1];
                let r = self.value(*input).shape()[0];
                let di = self.grad_buf(grads, *input);
                for i in 0..r {
                    for j in 0..*len {
                        di[i * c + start + j] += g[i * len + j];
                    }
                }
            }
            Op::ConcatCols(inputs) => {
                let widths: Vec<usize> =
                    inputs.iter().map(|&id| self.value(id).shape()[1]).collect();
                let total: usize = widths.iter().sum();
                let r = self.value(inputs[0]).shape()[0];
                let mut offset = 0;
                for (idx_in, &id) in inputs.iter().enumerate() {
                    let c = widths[idx_in];
                    let di = self.grad_buf(grads, id);
                    for i in 0..r {
                        for j in 0..c {
                            di[i * c + j] += g[i * total + offset + j];
                        }
                    }
                    offset += c;
                }
            }
            Op::RowNormalize(input) => {
                let (r, c) = (self.value(*input).shape()[0], self.value(*input).shape()[1]);
                let x = self.value(*input).data().to_vec();
                let target = (c as f64).sqrt();
                let di = self.grad_buf(grads, *input);
                for i in 0..r {
                    let row = &x[i * c..(i + 1) * c];
                    let gi = &g[i * c..(i + 1) * c];
                    let norm = kernels::dot(row, row).sqrt();
                    let gx = kernels::dot(gi, row);
                    let s = target / norm;
                    let n2 = norm * norm;
                    for j in 0..c {
                        di[i * c + j] += s * (gi[j] - row[j] * gx / n2);
                    }
                }
            }
            Op::Gelu(input) => {
                let x = self.value(*input).data().to_vec();
                for ((dst, &gv), &xv) in self.grad_buf(grads, *input).iter_mut().zip(g).zip(&x) {
                    *dst += gv * kernels::gelu_deriv(xv);
                }
            }
            Op::Softmax { input, axis, .. } => {
                let y = self.value(NodeId(idx)).data().to_vec();
                let shape = self.value(*input).shape().to_vec();
                let axis_len = shape[*axis];
                let inner: usize = shape[*axis + 1..].iter().product();
                let outer: usize = shape[..*axis].iter().product();
                let di = self.grad_buf(grads, *input);
                for o in 0..outer {
                    for inr in 0..inner {
                        let base = o * axis_len * inner + inr;
                        let mut dotp = 0.0;
                        for a in 0..axis_len {
                            let p = base + a * inner;
                            dotp += g[p] * y[p];
                        }
                        for a in 0..axis_len {
                            let p = base + a * inner;
                            di[p] += y[p] * (g[p] - dotp);
                        }
                    }
                }
            }
            Op::LayerNorm { input, gain, bias, eps } => {
                let (r, c) = (self.value(*input).shape()[0], self.value(*input).shape()[1]);
                let x = self.value(*input).data().to_vec();
                let gv = self.value(*gain).data().to_vec();
                let cf = c as f64;

                {
                    let di = self.grad_buf(grads, *input);
                    for i in 0..r {
                        let row = &x[i * c..(i + 1) * c];
                        let grow = &g[i * c..(i + 1) * c];
                        let (mean, rstd) = layer_norm_stats(row, *eps);
                        let mut sum_gh = 0.0;
                        let mut sum_gh_xhat = 0.0;
                        for j in 0..c {
                            let xhat = (row[j] - mean) * rstd;
                            let gh = grow[j] * gv[j];
                            sum_gh += gh;
                            sum_gh_xhat += gh * xhat;
                        }
                        for j in 0..c {
                            let xhat = (row[j] - mean) * rstd;
                            let gh = grow[j] * gv[j];
                            di[i * c + j] +=
                                rstd * (gh - sum_gh / cf - xhat * sum_gh_xhat / cf);
                        }
                    }
                }
                {
                    let dg = self.grad_buf(grads, *gain);
                    for i in 0..r {
                        let row = &x[i * c..(i + 1) * c];
                        let (mean, rstd) = layer_norm_stats(row, *eps);
                        for j in 0..c {
                            dg[j] += g[i * c + j] * (row[j] - mean) * rstd;
                        }
                    }
                }
                {
                    let db = self.grad_buf(grads, *bias);
                    for i in 0..r {
                        for j in 0..c {
                            db[j] += g[i * c + j];
                        }
                    }
                }
            }
            Op::Dropout { input, mask } => {
                let mask = mask.clone();
                for ((dst, &gv), &m) in self.grad_buf(grads, *input).iter_mut().zip(g).zip(&mask) {
                    *dst += gv * m;
                }
            }
            Op::Sum(input) => {
                let gv = g[0];
                for dst in self.grad_buf(grads, *input).iter_mut() {
                    *dst += gv;
                }
            }
            Op::CrossEntropySum { logits, targets } => {
                let (n, c) = (self.value(*logits).shape()[0], self.value(*logits).shape()[1]);
                let src = self.value(*logits).data().to_vec();
                let targets = targets.clone();
                let gv = g[0];
                let dl = self.grad_buf(grads, *logits);
                let mut row = vec![0.0; c];
                for i in 0..n {
                    row.copy_from_slice(&src[i * c..(i + 1) * c]);
                    kernels::softmax_row_in_place(&mut row, None);
                    for j in 0..c {
                        let indicator = if j == targets[i] { 1.0 } else { 0.0 };
                        dl[i * c + j] += gv * (row[j] - indicator);
                    }
                }
            }
        }
    }
}

fn layer_norm_stats(row: &[f64], eps: f64) -> (f64, f64) {
    let c = row.len() as f64;
    let mean = row.iter().sum::<f64>() / c;
    let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / c;
    (mean, 1.0 / (var + eps).sqrt())
}

fn softmax_forward(
    data: &[f64],
    shape: &[usize],
    axis: usize,
    mask: Option<&[bool]>,
) -> Result<Vec<f64>> {
    let axis_len = shape[axis];
    let inner: usize = shape[axis + 1..].iter().product();
    let outer: usize = shape[..axis].iter().product();
    let mut out = vec![0.0; data.len()];
    for o in 0..outer {
        for inr in 0..inner {
            let base = o * axis_len * inner + inr;
            let mut max = f64::NEG_INFINITY;
            for a in 0..axis_len {
                let p = base + a * inner;
                let allowed = mask.map_or(true, |m| m[p]);
                if allowed && data[p] > max {
                    max = data[p];
                }
            }
            if max == f64::NEG_INFINITY {
                return Err(Error::InvalidArg(
                    "softmax: fully masked lane".into(),
                ));
            }
            let mut sum = 0.0;
            for a in 0..axis_len {
                let p = base + a * inner;
                let allowed = mask.map_or(true, |m| m[p]);
                if allowed {
                    out[p] = (data[p] - max).exp();
                    sum += out[p];
                }
            }
            for a in 0..axis_len {
                let p = base + a * inner;
                out[p] /= sum;
            }
        }
    }
    Ok(out)
}

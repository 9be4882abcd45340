//! Multi-head attention assembled from graph primitives.

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};

/// Projection parameters of one attention block, already bound to a graph.
#[derive(Debug, Clone, Copy)]
pub struct AttentionParams {
    pub wq: NodeId,
    pub bq: NodeId,
    pub wk: NodeId,
    pub bk: NodeId,
    pub wv: NodeId,
    pub bv: NodeId,
    pub wo: NodeId,
    pub bo: NodeId,
}

/// Scaled dot-product attention over `heads` parallel subspaces.
///
/// `q`, `k`, `v` are `[Lq, d]` / `[Lk, d]` token matrices. Queries and keys
/// are projected, split into heads of `d / heads` columns, scored with a
/// `1/sqrt(head_dim)` scale, optionally masked causally (query `i` sees
/// keys `j <= i`), soft-maxed, and recombined through the output projection.
pub fn multi_head_attention(
    g: &mut Graph,
    q: NodeId,
    k: NodeId,
    v: NodeId,
    heads: usize,
    causal: bool,
    params: &AttentionParams,
) -> Result<NodeId> {
    let d = *g
        .value(q)
        .shape()
        .last()
        .ok_or_else(|| Error::Shape("attention: scalar query".into()))?;
    if heads == 0 || d % heads != 0 {
        return Err(Error::Shape(format!(
            "attention: model dim {d} not divisible by {heads} heads"
        )));
    }
    let head_dim = d / heads;
    let lq = g.value(q).shape()[0];
    let lk = g.value(k).shape()[0];
    if causal && lq != lk {
        return Err(Error::Shape(
            "attention: causal mask requires matching query/key lengths".into(),
        ));
    }

    let qp = {
        let t = g.matmul(q, params.wq)?;
        g.add_row_vec(t, params.bq)?
    };
    let kp = {
        let t = g.matmul(k, params.wk)?;
        g.add_row_vec(t, params.bk)?
    };
    let vp = {
        let t = g.matmul(v, params.wv)?;
        g.add_row_vec(t, params.bv)?
    };

    let mask = causal.then(|| causal_mask(lq));
    let scale = 1.0 / (head_dim as f64).sqrt();

    let mut head_outputs = Vec::with_capacity(heads);
    for h in 0..heads {
        let qh = g.slice_cols(qp, h * head_dim, head_dim)?;
        let kh = g.slice_cols(kp, h * head_dim, head_dim)?;
        let vh = g.slice_cols(vp, h * head_dim, head_dim)?;
        let scores = g.matmul_nt(qh, kh)?;
        let scaled = g.scale(scores, scale);
        let weights = g.softmax(scaled, 1, mask.clone())?;
        head_outputs.push(g.matmul(weights, vh)?);
    }

    let merged = g.concat_cols(&head_outputs)?;
    let out = g.matmul(merged, params.wo)?;
    g.add_row_vec(out, params.bo)
}

fn causal_mask(len: usize) -> Vec<bool> {
    let mut mask = vec![false; len * len];
    for i in 0..len {
        for j in 0..=i {
            mask[i * len + j] = true;
        }
    }
    mask
}

//! Multihop graph attention.
//!
//! Per head: `A = softmax(Q K^T / sqrt(d_k) + M)` where `M` masks pairs more
//! than `h` hops apart, then `A~ = renormalize(F(D) * A)` elementwise, and
//! the head output is `A~ V`. Heads are concatenated and projected.

use alloc::boxed::Box;
use alloc::vec::Vec;

use super::kernel::{KernelField, KERNEL_SCALARS};
use super::{EncoderConfig, KernelKind};
use crate::error::{bail, Result};
use crate::graph::{add_skip_edges, compute_distance_matrix, DistanceMatrix, QueryRole, SceneGraph, TokenSequence};
use crate::math;
use crate::numerics::{NodeId, ParamId, Tape, Tensor};

/// Additive mask: `0` where `d_ij <= h`, `-inf` beyond `h` or unreachable.
pub fn hop_mask(d: &DistanceMatrix, h: u32) -> Tensor {
    let n = d.n();
    let mut out = Tensor::zeros(&[n, n]);
    for i in 0..n {
        for j in 0..n {
            if !hop_allowed(d, i, j, Some(h)) {
                out.set(i, j, f64::NEG_INFINITY);
            }
        }
    }
    out
}

#[inline]
fn hop_allowed(d: &DistanceMatrix, i: usize, j: usize, h: Option<u32>) -> bool {
    match h {
        None => true,
        Some(h) => !d.is_unreachable(i, j) && d.get(i, j) <= h,
    }
}

/// Everything about one sequence that attention needs besides activations.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionContext {
    pub distances: DistanceMatrix,
    pub roles: Vec<QueryRole>,
    pub allowed: Vec<bool>,
}

impl AttentionContext {
    pub fn new(distances: DistanceMatrix, roles: Vec<QueryRole>, hop_limit: Option<u32>) -> Result<Self> {
        let n = distances.n();
        if roles.len() != n {
            bail!(Shape, "{} roles for a sequence of {}", roles.len(), n);
        }
        if hop_limit == Some(0) {
            bail!(Config, "hop limit must be at least 1");
        }
        let mut allowed = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                allowed.push(hop_allowed(&distances, i, j, hop_limit));
            }
        }
        Ok(AttentionContext { distances, roles, allowed })
    }

    pub fn for_sequence(seq: &TokenSequence, g: &SceneGraph, cfg: &EncoderConfig) -> Result<Self> {
        let enhanced = add_skip_edges(g);
        let d = compute_distance_matrix(seq, &enhanced, None)?;
        Self::new(d, seq.roles(), cfg.hop_limit)
    }

    pub fn len(&self) -> usize {
        self.roles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roles.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeadParams {
    pub wq: ParamId,
    pub bq: ParamId,
    pub wk: ParamId,
    pub bk: ParamId,
    pub wv: ParamId,
    pub bv: ParamId,
    /// `1 x 4` raw kernel scalars.
    pub kernel: ParamId,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttentionParams {
    pub heads: Vec<HeadParams>,
    pub wo: ParamId,
    pub bo: ParamId,
}

pub struct AttentionOutput {
    pub output: NodeId,
    /// Rescaled attention matrix of every head.
    pub weights: Vec<NodeId>,
}

pub fn multihop_attention(
    tape: &mut Tape<'_>,
    input: NodeId,
    ctx: &AttentionContext,
    params: &AttentionParams,
    kernel: KernelKind,
) -> Result<AttentionOutput> {
    let n = tape.value(input).rows();
    if ctx.len() != n {
        bail!(Shape, "attention context covers {} tokens, input has {}", ctx.len(), n);
    }
    let mut head_outputs = Vec::with_capacity(params.heads.len());
    let mut weights = Vec::with_capacity(params.heads.len());
    for head in &params.heads {
        let proj = |tape: &mut Tape<'_>, w: ParamId, b: ParamId| -> Result<NodeId> {
            let (w, b) = (tape.param(w), tape.param(b));
            tape.linear(input, w, Some(b))
        };
        let q = proj(tape, head.wq, head.bq)?;
        let k = proj(tape, head.wk, head.bk)?;
        let v = proj(tape, head.wv, head.bv)?;
        let d_k = tape.value(q).cols();
        let scores = tape.matmul_t(q, k)?;
        let scaled = tape.scale(scores, 1.0 / math::sqrt(d_k as f64));
        let attn = tape.masked_softmax(scaled, ctx.allowed.clone())?;
        let attn = match kernel {
            KernelKind::Off => attn,
            kind => {
                let raw = tape.param(head.kernel);
                debug_assert_eq!(tape.value(raw).len(), KERNEL_SCALARS);
                let field = tape.field(raw, Box::new(KernelField::new(&ctx.distances, &ctx.roles, kind)))?;
                let rescaled = tape.mul(field, attn)?;
                tape.renormalize(rescaled)?
            }
        };
        weights.push(attn);
        head_outputs.push(tape.matmul(attn, v)?);
    }
    let concat = tape.concat_cols(&head_outputs)?;
    let (wo, bo) = (tape.param(params.wo), tape.param(params.bo));
    let output = tape.linear(concat, wo, Some(bo))?;
    Ok(AttentionOutput { output, weights })
}

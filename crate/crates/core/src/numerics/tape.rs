//! Reverse-mode tape over 2-D tensors.
//!
//! Every operation records its inputs and enough cached state for an
//! analytic backward rule. Nodes are appended in evaluation order, so a
//! reverse sweep visits them in a valid topological order.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use super::functional::{focal_modulation, gelu, gelu_grad, masked_softmax, renormalize_unchecked};
use super::params::{Gradients, ParamId, ParamStore};
use super::tensor::gemm;
use super::Tensor;
use crate::error::{bail, Result};
use crate::math;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NodeId(usize);

/// A tensor-valued function of a small parameter vector, with its
/// vector-Jacobian product. Used for the attention distance kernels.
pub trait ParamField {
    fn eval(&self, params: &[f64]) -> Tensor;
    /// `sum_ij grad_out_ij * d out_ij / d params_k` for every `k`.
    fn vjp(&self, params: &[f64], out: &Tensor, grad_out: &Tensor) -> Vec<f64>;
}

enum Op {
    Constant,
    Param(ParamId),
    MatMul(NodeId, NodeId),
    MatMulTransB(NodeId, NodeId),
    Add(NodeId, NodeId),
    AddRow(NodeId, NodeId),
    Mul(NodeId, NodeId),
    Scale(NodeId, f64),
    MaskedSoftmax(NodeId),
    Renormalize(NodeId),
    Field(NodeId, Box<dyn ParamField>),
    ConcatCols(Vec<NodeId>),
    LayerNorm { x: NodeId, gamma: NodeId, beta: NodeId, xhat: Tensor, inv_std: Vec<f64> },
    Gelu(NodeId),
    Lookup(NodeId, Vec<Option<usize>>),
    SelectRows(NodeId, Vec<usize>),
    CrossEntropy { logits: NodeId, targets: Vec<usize>, weights: Option<Vec<f64>>, gamma: f64, probs: Tensor },
    Sum(NodeId),
    Mean(NodeId),
}

struct Node {
    value: Option<Tensor>,
    op: Op,
    requires_grad: bool,
}

pub const LAYER_NORM_EPS: f64 = 1e-5;

/// Records one forward computation against a borrowed [`ParamStore`].
pub struct Tape<'s> {
    store: &'s ParamStore,
    nodes: Vec<Node>,
    param_nodes: Vec<Option<NodeId>>,
}

impl<'s> Tape<'s> {
    pub fn new(store: &'s ParamStore) -> Self {
        Tape { store, nodes: Vec::new(), param_nodes: vec![None; store.len()] }
    }

    pub fn store(&self) -> &'s ParamStore {
        self.store
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, id: NodeId) -> &Tensor {
        let node = &self.nodes[id.0];
        match (&node.value, &node.op) {
            (Some(v), _) => v,
            (None, Op::Param(p)) => self.store.value(*p),
            _ => unreachable!("node without value"),
        }
    }

    fn push(&mut self, value: Tensor, op: Op, inputs: &[NodeId]) -> NodeId {
        let requires_grad = inputs.iter().any(|i| self.nodes[i.0].requires_grad);
        self.nodes.push(Node { value: Some(value), op, requires_grad });
        NodeId(self.nodes.len() - 1)
    }

    pub fn constant(&mut self, value: Tensor) -> NodeId {
        self.nodes.push(Node { value: Some(value), op: Op::Constant, requires_grad: false });
        NodeId(self.nodes.len() - 1)
    }

    /// Leaf for a stored parameter; repeated calls share one node.
    pub fn param(&mut self, id: ParamId) -> NodeId {
        if let Some(n) = self.param_nodes[id.0] {
            return n;
        }
        self.nodes.push(Node { value: None, op: Op::Param(id), requires_grad: true });
        let n = NodeId(self.nodes.len() - 1);
        self.param_nodes[id.0] = Some(n);
        n
    }

    pub fn matmul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let out = self.value(a).matmul(self.value(b))?;
        Ok(self.push(out, Op::MatMul(a, b), &[a, b]))
    }

    /// `a . b^T`
    pub fn matmul_t(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let (va, vb) = (self.value(a), self.value(b));
        if va.cols() != vb.cols() {
            bail!(Shape, "matmul_t {:?} x {:?}^T", va.shape(), vb.shape());
        }
        let (m, k, n) = (va.rows(), va.cols(), vb.rows());
        let mut out = Tensor::zeros(&[m, n]);
        gemm(m, k, n, va.data(), false, vb.data(), true, out.data_mut(), false);
        Ok(self.push(out, Op::MatMulTransB(a, b), &[a, b]))
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let (va, vb) = (self.value(a), self.value(b));
        if !va.same_shape(vb) {
            bail!(Shape, "add {:?} + {:?}", va.shape(), vb.shape());
        }
        let mut out = va.clone();
        out.add_assign(vb);
        Ok(self.push(out, Op::Add(a, b), &[a, b]))
    }

    /// Adds a `1 x m` row vector to every row of `a`.
    pub fn add_row(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let (va, vb) = (self.value(a), self.value(b));
        if vb.rows() != 1 || vb.cols() != va.cols() {
            bail!(Shape, "add_row {:?} + {:?}", va.shape(), vb.shape());
        }
        let mut out = va.clone();
        for r in 0..out.rows() {
            for (x, y) in out.row_mut(r).iter_mut().zip(vb.data()) {
                *x += y;
            }
        }
        Ok(self.push(out, Op::AddRow(a, b), &[a, b]))
    }

    /// `a * x + bias`
    pub fn linear(&mut self, x: NodeId, w: NodeId, bias: Option<NodeId>) -> Result<NodeId> {
        let y = self.matmul(x, w)?;
        match bias {
            Some(b) => self.add_row(y, b),
            None => Ok(y),
        }
    }

    /// Elementwise product.
    pub fn mul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let (va, vb) = (self.value(a), self.value(b));
        if !va.same_shape(vb) {
            bail!(Shape, "mul {:?} * {:?}", va.shape(), vb.shape());
        }
        let data = va.data().iter().zip(vb.data()).map(|(x, y)| x * y).collect();
        let out = Tensor::new(va.shape().to_vec(), data)?;
        Ok(self.push(out, Op::Mul(a, b), &[a, b]))
    }

    pub fn scale(&mut self, a: NodeId, factor: f64) -> NodeId {
        let mut out = self.value(a).clone();
        out.scale_mut(factor);
        self.push(out, Op::Scale(a, factor), &[a])
    }

    /// Row softmax restricted to `allowed` entries; masked entries are 0 and
    /// fully masked rows are all zeros.
    pub fn masked_softmax(&mut self, a: NodeId, allowed: Vec<bool>) -> Result<NodeId> {
        let va = self.value(a);
        if allowed.len() != va.len() {
            bail!(Shape, "softmax mask has {} entries for {:?}", allowed.len(), va.shape());
        }
        if va.data().iter().any(|v| v.is_nan()) {
            bail!(Numeric, "softmax input contains NaN");
        }
        let out = masked_softmax(va, &allowed);
        Ok(self.push(out, Op::MaskedSoftmax(a), &[a]))
    }

    /// Row renormalization of a non-negative matrix.
    pub fn renormalize(&mut self, a: NodeId) -> Result<NodeId> {
        let va = self.value(a);
        if va.data().iter().any(|v| !(*v >= 0.0)) {
            bail!(Contract, "renormalize needs non-negative entries");
        }
        let out = renormalize_unchecked(va);
        Ok(self.push(out, Op::Renormalize(a), &[a]))
    }

    /// Evaluates `field` at the (flattened) values of `params`.
    pub fn field(&mut self, params: NodeId, field: Box<dyn ParamField>) -> Result<NodeId> {
        let out = field.eval(self.value(params).data());
        if out.data().iter().any(|v| !v.is_finite()) {
            bail!(Numeric, "parameter field is not finite at {:?}", self.value(params).data());
        }
        Ok(self.push(out, Op::Field(params, field), &[params]))
    }

    pub fn concat_cols(&mut self, parts: &[NodeId]) -> Result<NodeId> {
        let Some(first) = parts.first() else {
            bail!(Shape, "concat of zero tensors");
        };
        let rows = self.value(*first).rows();
        let mut total = 0;
        for p in parts {
            let v = self.value(*p);
            if v.rows() != rows {
                bail!(Shape, "concat rows {} vs {}", v.rows(), rows);
            }
            total += v.cols();
        }
        let mut out = Tensor::zeros(&[rows, total]);
        let mut offset = 0;
        for p in parts {
            let v = self.value(*p);
            let c = v.cols();
            for r in 0..rows {
                out.row_mut(r)[offset..offset + c].copy_from_slice(v.row(r));
            }
            offset += c;
        }
        Ok(self.push(out, Op::ConcatCols(parts.to_vec()), parts))
    }

    /// Row layer norm with affine `gamma`, `beta` (`1 x m`), epsilon 1e-5.
    pub fn layer_norm(&mut self, x: NodeId, gamma: NodeId, beta: NodeId) -> Result<NodeId> {
        let vx = self.value(x);
        let (rows, m) = (vx.rows(), vx.cols());
        let (vg, vb) = (self.value(gamma), self.value(beta));
        if vg.len() != m || vb.len() != m {
            bail!(Shape, "layer_norm affine {:?}/{:?} for width {}", vg.shape(), vb.shape(), m);
        }
        let mut xhat = Tensor::zeros(vx.shape());
        let mut inv_std = Vec::with_capacity(rows);
        for r in 0..rows {
            let row = vx.row(r);
            let mean = row.iter().sum::<f64>() / m as f64;
            let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / m as f64;
            let is = 1.0 / math::sqrt(var + LAYER_NORM_EPS);
            for (dst, v) in xhat.row_mut(r).iter_mut().zip(row) {
                *dst = (v - mean) * is;
            }
            inv_std.push(is);
        }
        let mut out = xhat.clone();
        for r in 0..rows {
            for ((o, g), b) in out.row_mut(r).iter_mut().zip(vg.data()).zip(vb.data()) {
                *o = *o * g + b;
            }
        }
        Ok(self.push(out, Op::LayerNorm { x, gamma, beta, xhat, inv_std }, &[x, gamma, beta]))
    }

    pub fn gelu(&mut self, a: NodeId) -> NodeId {
        let va = self.value(a);
        let data = va.data().iter().map(|&v| gelu(v)).collect();
        let out = Tensor::new(va.shape().to_vec(), data).expect("same shape");
        self.push(out, Op::Gelu(a), &[a])
    }

    /// Gathers rows of `table`; `None` produces a zero row.
    pub fn lookup(&mut self, table: NodeId, indices: Vec<Option<usize>>) -> Result<NodeId> {
        let vt = self.value(table);
        let (rows, cols) = (vt.rows(), vt.cols());
        let mut out = Tensor::zeros(&[indices.len(), cols]);
        for (r, idx) in indices.iter().enumerate() {
            if let Some(i) = *idx {
                if i >= rows {
                    bail!(Shape, "lookup index {} outside table of {} rows", i, rows);
                }
                out.row_mut(r).copy_from_slice(vt.row(i));
            }
        }
        Ok(self.push(out, Op::Lookup(table, indices), &[table]))
    }

    pub fn select_rows(&mut self, a: NodeId, rows: Vec<usize>) -> Result<NodeId> {
        let va = self.value(a);
        let cols = va.cols();
        let mut out = Tensor::zeros(&[rows.len(), cols]);
        for (k, &r) in rows.iter().enumerate() {
            if r >= va.rows() {
                bail!(Shape, "row {} outside {} rows", r, va.rows());
            }
            out.row_mut(k).copy_from_slice(va.row(r));
        }
        Ok(self.push(out, Op::SelectRows(a, rows), &[a]))
    }

    /// Mean softmax cross-entropy of `logits` rows against `targets`.
    pub fn cross_entropy(&mut self, logits: NodeId, targets: Vec<usize>) -> Result<NodeId> {
        self.focal_cross_entropy(logits, targets, 0.0, None)
    }

    /// Mean over rows of `w[t] * (1 - p_t)^gamma * (-ln p_t)` with
    /// `p = softmax(logits)`. `gamma = 0` and no weights is plain
    /// cross-entropy.
    pub fn focal_cross_entropy(
        &mut self,
        logits: NodeId,
        targets: Vec<usize>,
        gamma: f64,
        class_weights: Option<Vec<f64>>,
    ) -> Result<NodeId> {
        let vl = self.value(logits);
        let (rows, k) = (vl.rows(), vl.cols());
        if targets.len() != rows {
            bail!(Shape, "{} targets for {} logit rows", targets.len(), rows);
        }
        if let Some(t) = targets.iter().find(|&&t| t >= k) {
            bail!(Validation, "target class {} outside {} classes", t, k);
        }
        if let Some(w) = &class_weights {
            if w.len() != k {
                bail!(Shape, "{} class weights for {} classes", w.len(), k);
            }
        }
        if !(gamma >= 0.0) {
            bail!(Config, "focal gamma must be >= 0");
        }
        let mut probs = Tensor::zeros(&[rows, k]);
        let mut total = 0.0;
        for r in 0..rows {
            let row = vl.row(r);
            let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let dst = probs.row_mut(r);
            let mut sum = 0.0;
            for (d, v) in dst.iter_mut().zip(row) {
                *d = math::exp(v - max);
                sum += *d;
            }
            for d in dst.iter_mut() {
                *d /= sum;
            }
            let t = targets[r];
            let log_pt = row[t] - max - math::ln(sum);
            let w = class_weights.as_ref().map_or(1.0, |w| w[t]);
            total += -w * focal_modulation(dst[t], gamma) * log_pt;
        }
        let loss = if rows == 0 { 0.0 } else { total / rows as f64 };
        if !loss.is_finite() {
            bail!(Numeric, "cross-entropy is {}", loss);
        }
        let op = Op::CrossEntropy { logits, targets, weights: class_weights, gamma, probs };
        Ok(self.push(Tensor::scalar(loss), op, &[logits]))
    }

    pub fn sum(&mut self, a: NodeId) -> NodeId {
        let s = self.value(a).data().iter().sum();
        self.push(Tensor::scalar(s), Op::Sum(a), &[a])
    }

    pub fn mean(&mut self, a: NodeId) -> NodeId {
        let v = self.value(a);
        let s = v.data().iter().sum::<f64>() / v.len().max(1) as f64;
        self.push(Tensor::scalar(s), Op::Mean(a), &[a])
    }

    /// Backpropagates from a scalar `loss` and returns parameter gradients.
    pub fn backward(&self, loss: NodeId) -> Result<Gradients> {
        let lv = self.value(loss);
        if lv.len() != 1 {
            bail!(Shape, "backward needs a scalar loss, got {:?}", lv.shape());
        }
        if !lv.item().is_finite() {
            bail!(Numeric, "loss is {}", lv.item());
        }
        let mut grads: Vec<Option<Tensor>> = (0..self.nodes.len()).map(|_| None).collect();
        grads[loss.0] = Some(Tensor::scalar(1.0));
        let mut out = Gradients { grads: vec![None; self.store.len()] };

        for idx in (0..=loss.0).rev() {
            let Some(g) = grads[idx].take() else { continue };
            let node = &self.nodes[idx];
            if !node.requires_grad {
                continue;
            }
            match &node.op {
                Op::Constant => {}
                Op::Param(p) => match &mut out.grads[p.0] {
                    Some(acc) => acc.add_assign(&g),
                    slot => *slot = Some(g),
                },
                Op::MatMul(a, b) => {
                    let (va, vb) = (self.value(*a), self.value(*b));
                    let (m, k, n) = (va.rows(), va.cols(), vb.cols());
                    if let Some(ga) = self.slot(&mut grads, *a) {
                        gemm(m, n, k, g.data(), false, vb.data(), true, ga.data_mut(), true);
                    }
                    if let Some(gb) = self.slot(&mut grads, *b) {
                        gemm(k, m, n, va.data(), true, g.data(), false, gb.data_mut(), true);
                    }
                }
                Op::MatMulTransB(a, b) => {
                    let (va, vb) = (self.value(*a), self.value(*b));
                    let (m, k, n) = (va.rows(), va.cols(), vb.rows());
                    if let Some(ga) = self.slot(&mut grads, *a) {
                        gemm(m, n, k, g.data(), false, vb.data(), false, ga.data_mut(), true);
                    }
                    if let Some(gb) = self.slot(&mut grads, *b) {
                        gemm(n, m, k, g.data(), true, va.data(), false, gb.data_mut(), true);
                    }
                }
                Op::Add(a, b) => {
                    for x in [*a, *b] {
                        if let Some(gx) = self.slot(&mut grads, x) {
                            gx.add_assign(&g);
                        }
                    }
                }
                Op::AddRow(a, b) => {
                    if let Some(ga) = self.slot(&mut grads, *a) {
                        ga.add_assign(&g);
                    }
                    if let Some(gb) = self.slot(&mut grads, *b) {
                        for r in 0..g.rows() {
                            for (d, v) in gb.data_mut().iter_mut().zip(g.row(r)) {
                                *d += v;
                            }
                        }
                    }
                }
                Op::Mul(a, b) => {
                    let (va, vb) = (self.value(*a).clone(), self.value(*b).clone());
                    if let Some(ga) = self.slot(&mut grads, *a) {
                        for ((d, gv), bv) in ga.data_mut().iter_mut().zip(g.data()).zip(vb.data()) {
                            *d += gv * bv;
                        }
                    }
                    if let Some(gb) = self.slot(&mut grads, *b) {
                        for ((d, gv), av) in gb.data_mut().iter_mut().zip(g.data()).zip(va.data()) {
                            *d += gv * av;
                        }
                    }
                }
                Op::Scale(a, f) => {
                    if let Some(ga) = self.slot(&mut grads, *a) {
                        for (d, gv) in ga.data_mut().iter_mut().zip(g.data()) {
                            *d += f * gv;
                        }
                    }
                }
                Op::MaskedSoftmax(a) => {
                    let y = node.value.as_ref().expect("softmax value");
                    if let Some(ga) = self.slot(&mut grads, *a) {
                        for r in 0..y.rows() {
                            let (yr, gr) = (y.row(r), g.row(r));
                            let dot: f64 = yr.iter().zip(gr).map(|(p, q)| p * q).sum();
                            for ((d, p), q) in ga.row_mut(r).iter_mut().zip(yr).zip(gr) {
                                *d += p * (q - dot);
                            }
                        }
                    }
                }
                Op::Renormalize(a) => {
                    let y = node.value.as_ref().expect("renormalize value");
                    let x = self.value(*a);
                    let sums: Vec<f64> = (0..x.rows()).map(|r| x.row(r).iter().sum()).collect();
                    if let Some(ga) = self.slot(&mut grads, *a) {
                        for (r, &s) in sums.iter().enumerate() {
                            if s <= 0.0 {
                                continue;
                            }
                            let (yr, gr) = (y.row(r), g.row(r));
                            let dot: f64 = yr.iter().zip(gr).map(|(p, q)| p * q).sum();
                            for (d, q) in ga.row_mut(r).iter_mut().zip(gr) {
                                *d += (q - dot) / s;
                            }
                        }
                    }
                }
                Op::Field(p, field) => {
                    let params = self.value(*p).data().to_vec();
                    let y = node.value.as_ref().expect("field value");
                    let vjp = field.vjp(&params, y, &g);
                    if let Some(gp) = self.slot(&mut grads, *p) {
                        for (d, v) in gp.data_mut().iter_mut().zip(vjp) {
                            *d += v;
                        }
                    }
                }
                Op::ConcatCols(parts) => {
                    let mut offset = 0;
                    for part in parts {
                        let c = self.value(*part).cols();
                        if let Some(gp) = self.slot(&mut grads, *part) {
                            for r in 0..g.rows() {
                                for (d, v) in gp.row_mut(r).iter_mut().zip(&g.row(r)[offset..offset + c]) {
                                    *d += v;
                                }
                            }
                        }
                        offset += c;
                    }
                }
                Op::LayerNorm { x, gamma, beta, xhat, inv_std } => {
                    let m = xhat.cols();
                    let vg = self.value(*gamma).data().to_vec();
                    if let Some(gg) = self.slot(&mut grads, *gamma) {
                        for r in 0..g.rows() {
                            for ((d, gv), xv) in gg.data_mut().iter_mut().zip(g.row(r)).zip(xhat.row(r)) {
                                *d += gv * xv;
                            }
                        }
                    }
                    if let Some(gb) = self.slot(&mut grads, *beta) {
                        for r in 0..g.rows() {
                            for (d, gv) in gb.data_mut().iter_mut().zip(g.row(r)) {
                                *d += gv;
                            }
                        }
                    }
                    if let Some(gx) = self.slot(&mut grads, *x) {
                        let mut gxhat = vec![0.0; m];
                        for r in 0..g.rows() {
                            for ((d, gv), gm) in gxhat.iter_mut().zip(g.row(r)).zip(&vg) {
                                *d = gv * gm;
                            }
                            let xr = xhat.row(r);
                            let s1: f64 = gxhat.iter().sum();
                            let s2: f64 = gxhat.iter().zip(xr).map(|(a, b)| a * b).sum();
                            let scale = inv_std[r] / m as f64;
                            for ((d, gh), xh) in gx.row_mut(r).iter_mut().zip(&gxhat).zip(xr) {
                                *d += scale * (m as f64 * gh - s1 - xh * s2);
                            }
                        }
                    }
                }
                Op::Gelu(a) => {
                    let x = self.value(*a).clone();
                    if let Some(ga) = self.slot(&mut grads, *a) {
                        for ((d, gv), xv) in ga.data_mut().iter_mut().zip(g.data()).zip(x.data()) {
                            *d += gv * gelu_grad(*xv);
                        }
                    }
                }
                Op::Lookup(table, indices) => {
                    if let Some(gt) = self.slot(&mut grads, *table) {
                        for (r, idx) in indices.iter().enumerate() {
                            if let Some(i) = *idx {
                                for (d, v) in gt.row_mut(i).iter_mut().zip(g.row(r)) {
                                    *d += v;
                                }
                            }
                        }
                    }
                }
                Op::SelectRows(a, rows) => {
                    if let Some(ga) = self.slot(&mut grads, *a) {
                        for (k, &r) in rows.iter().enumerate() {
                            for (d, v) in ga.row_mut(r).iter_mut().zip(g.row(k)) {
                                *d += v;
                            }
                        }
                    }
                }
                Op::CrossEntropy { logits, targets, weights, gamma, probs } => {
                    let n = targets.len();
                    if n == 0 {
                        continue;
                    }
                    let upstream = g.item() / n as f64;
                    if let Some(gl) = self.slot(&mut grads, *logits) {
                        for (r, &t) in targets.iter().enumerate() {
                            let pr = probs.row(r);
                            let pt = pr[t];
                            let w = weights.as_ref().map_or(1.0, |w| w[t]);
                            // dL/dz_j = w * c * (delta_tj - p_j)
                            let mut c = -focal_modulation(pt, *gamma);
                            if *gamma != 0.0 && pt < 1.0 && pt > 0.0 {
                                c += gamma * math::powf(1.0 - pt, gamma - 1.0) * pt * math::ln(pt);
                            }
                            let coef = upstream * w * c;
                            for (j, (d, p)) in gl.row_mut(r).iter_mut().zip(pr).enumerate() {
                                let delta = if j == t { 1.0 } else { 0.0 };
                                *d += coef * (delta - p);
                            }
                        }
                    }
                }
                Op::Sum(a) => {
                    let s = g.item();
                    if let Some(ga) = self.slot(&mut grads, *a) {
                        ga.data_mut().iter_mut().for_each(|d| *d += s);
                    }
                }
                Op::Mean(a) => {
                    let n = self.value(*a).len().max(1) as f64;
                    let s = g.item() / n;
                    if let Some(ga) = self.slot(&mut grads, *a) {
                        ga.data_mut().iter_mut().for_each(|d| *d += s);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Gradient accumulator for `id`, created on first use; `None` for
    /// nodes that do not lead to a parameter.
    fn slot<'g>(&self, grads: &'g mut [Option<Tensor>], id: NodeId) -> Option<&'g mut Tensor> {
        if !self.nodes[id.0].requires_grad {
            return None;
        }
        let shape = self.value(id).shape().to_vec();
        Some(grads[id.0].get_or_insert_with(|| Tensor::zeros(&shape)))
    }
}

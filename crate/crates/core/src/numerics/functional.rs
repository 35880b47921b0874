//! Plain (non-recording) numeric kernels shared with the tape.

use alloc::vec::Vec;

use super::Tensor;
use crate::error::{bail, Result};
use crate::math;

/// Lower bound applied to probabilities before taking a logarithm.
pub const PROB_CLAMP: f64 = 1e-12;

/// Row-wise softmax of `x + mask`, where every mask entry is `0` or `-inf`.
///
/// Masked entries come out exactly 0; a fully masked row comes out all zeros.
pub fn softmax_rows(x: &Tensor, additive_mask: &Tensor) -> Result<Tensor> {
    if !x.same_shape(additive_mask) {
        bail!(Shape, "softmax input {:?} vs mask {:?}", x.shape(), additive_mask.shape());
    }
    if x.data().iter().any(|v| v.is_nan()) {
        bail!(Numeric, "softmax input contains NaN");
    }
    let mut allowed = Vec::with_capacity(x.len());
    for &m in additive_mask.data() {
        if m == 0.0 {
            allowed.push(true);
        } else if m == f64::NEG_INFINITY {
            allowed.push(false);
        } else {
            bail!(Contract, "mask entries must be 0 or -inf, found {}", m);
        }
    }
    Ok(masked_softmax(x, &allowed))
}

pub(crate) fn masked_softmax(x: &Tensor, allowed: &[bool]) -> Tensor {
    let cols = x.cols();
    let mut out = Tensor::zeros(x.shape());
    for r in 0..x.rows() {
        let row = x.row(r);
        let keep = &allowed[r * cols..(r + 1) * cols];
        let max = row
            .iter()
            .zip(keep)
            .filter(|(_, &k)| k)
            .map(|(v, _)| *v)
            .fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            continue;
        }
        let dst = out.row_mut(r);
        let mut sum = 0.0;
        for c in 0..cols {
            if keep[c] {
                let e = math::exp(row[c] - max);
                dst[c] = e;
                sum += e;
            }
        }
        for v in dst.iter_mut() {
            *v /= sum;
        }
    }
    out
}

/// `e_ij / sum_j e_ij` per row; all-zero rows stay zero.
pub fn renormalize_rows(x: &Tensor) -> Result<Tensor> {
    if let Some(v) = x.data().iter().find(|v| !(**v >= 0.0)) {
        bail!(Contract, "renormalize_rows needs non-negative entries, found {}", v);
    }
    Ok(renormalize_unchecked(x))
}

pub(crate) fn renormalize_unchecked(x: &Tensor) -> Tensor {
    let mut out = x.clone();
    for r in 0..x.rows() {
        let row = out.row_mut(r);
        let sum: f64 = row.iter().sum();
        if sum > 0.0 {
            for v in row.iter_mut() {
                *v /= sum;
            }
        }
    }
    out
}

/// `-(1 - p_t)^gamma * ln(p_t)` for the target-class probability `p_t`.
///
/// `p_t` below [`PROB_CLAMP`] is clamped (with a warning).
pub fn focal_loss(probs: &Tensor, target: usize, gamma: f64) -> Result<f64> {
    if target >= probs.len() {
        bail!(Validation, "target {} outside {} classes", target, probs.len());
    }
    if !(gamma >= 0.0) {
        bail!(Config, "focal gamma must be >= 0, got {}", gamma);
    }
    let mut p = probs.data()[target];
    if !p.is_finite() {
        bail!(Numeric, "target probability is {}", p);
    }
    if p < PROB_CLAMP {
        log::warn!("focal_loss: target probability {p:e} clamped to {PROB_CLAMP:e}");
        p = PROB_CLAMP;
    }
    Ok(-focal_modulation(p, gamma) * math::ln(p))
}

/// Negative log-likelihood of `target` under a probability vector.
pub fn cross_entropy_probs(probs: &Tensor, target: usize) -> Result<f64> {
    focal_loss(probs, target, 0.0)
}

/// `(1 - p)^gamma`, exactly 1 when `gamma == 0`.
#[inline]
pub(crate) fn focal_modulation(p: f64, gamma: f64) -> f64 {
    if gamma == 0.0 {
        1.0
    } else {
        math::powf((1.0 - p).max(0.0), gamma)
    }
}

/// Class-balanced weights `(1 - beta) / (1 - beta^n_c)`, rescaled so the mean
/// weight is 1. `beta = 0` gives all ones.
pub fn class_balanced_weights(class_counts: &[u64], beta: f64) -> Result<Tensor> {
    Ok(Tensor::row_vector(normalize_mean_one(raw_class_balanced_weights(class_counts, beta)?)))
}

/// Unnormalized class-balanced weights.
pub fn raw_class_balanced_weights(class_counts: &[u64], beta: f64) -> Result<Vec<f64>> {
    if !(0.0..1.0).contains(&beta) {
        bail!(Config, "class-balanced beta must lie in [0, 1), got {}", beta);
    }
    if let Some(i) = class_counts.iter().position(|&c| c == 0) {
        bail!(Validation, "class {} has count 0; every class needs at least one sample", i);
    }
    Ok(class_counts
        .iter()
        .map(|&n| {
            // beta^n underflows to 0 for large n, which is the right limit
            let effective = 1.0 - math::powf(beta, n as f64);
            (1.0 - beta) / effective
        })
        .collect())
}

fn normalize_mean_one(mut w: Vec<f64>) -> Vec<f64> {
    if w.is_empty() {
        return w;
    }
    let mean = w.iter().sum::<f64>() / w.len() as f64;
    for v in &mut w {
        *v /= mean;
    }
    w
}

const INV_SQRT_2: f64 = core::f64::consts::FRAC_1_SQRT_2;
const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Exact (erf) GELU.
#[inline]
pub fn gelu(x: f64) -> f64 {
    0.5 * x * (1.0 + math::erf(x * INV_SQRT_2))
}

#[inline]
pub fn gelu_grad(x: f64) -> f64 {
    0.5 * (1.0 + math::erf(x * INV_SQRT_2)) + x * INV_SQRT_2PI * math::exp(-0.5 * x * x)
}

//! Distance kernels that rescale attention by hop count.
//!
//! Each head stores four unconstrained scalars
//! `[ln alpha_o, ln l_o, ln alpha_p, ln l_p]`; the `_o` pair applies to
//! entity queries and the `_p` pair to predicate queries. Any other query
//! (text, special) gets `F = 1`.

use alloc::vec::Vec;

use super::KernelKind;
use crate::graph::{DistanceMatrix, QueryRole};
use crate::math;
use crate::numerics::{ParamField, Tensor};

pub const KERNEL_SCALARS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    pub alpha_o: f64,
    pub l_o: f64,
    pub alpha_p: f64,
    pub l_p: f64,
}

impl Default for KernelParams {
    fn default() -> Self {
        KernelParams { alpha_o: 1.0, l_o: 1.0, alpha_p: 1.0, l_p: 1.0 }
    }
}

impl KernelParams {
    pub fn from_raw(raw: &[f64]) -> Self {
        assert_eq!(raw.len(), KERNEL_SCALARS, "kernel expects four raw scalars");
        KernelParams {
            alpha_o: math::exp(raw[0]),
            l_o: math::exp(raw[1]),
            alpha_p: math::exp(raw[2]),
            l_p: math::exp(raw[3]),
        }
    }

    pub fn to_raw(&self) -> [f64; KERNEL_SCALARS] {
        [math::ln(self.alpha_o), math::ln(self.l_o), math::ln(self.alpha_p), math::ln(self.l_p)]
    }

    /// `(alpha, l)` for a query role, `None` for non-visual queries.
    pub fn for_role(&self, role: QueryRole) -> Option<(f64, f64)> {
        match role {
            QueryRole::Entity => Some((self.alpha_o, self.l_o)),
            QueryRole::Predicate => Some((self.alpha_p, self.l_p)),
            QueryRole::Other => None,
        }
    }
}

/// `F(d)` for a query of the given role. NaN when a learnable kernel has a
/// non-positive (collapsed) scalar.
pub fn kernel_value(d: u32, role: QueryRole, params: &KernelParams, kind: KernelKind) -> f64 {
    match kind {
        KernelKind::Off => 1.0,
        KernelKind::LinearIdentity => f64::from(d),
        KernelKind::RationalQuadratic | KernelKind::Gaussian => match params.for_role(role) {
            None => 1.0,
            Some((alpha, l)) if alpha > 0.0 && l > 0.0 => shaped(kind, f64::from(d), alpha, l),
            Some(_) => f64::NAN,
        },
    }
}

fn shaped(kind: KernelKind, d: f64, alpha: f64, l: f64) -> f64 {
    let r2 = (d - 1.0) * (d - 1.0);
    match kind {
        KernelKind::RationalQuadratic => math::powf(1.0 + r2 / (2.0 * alpha * l * l), -alpha),
        KernelKind::Gaussian => math::exp(-r2 / (2.0 * l * l)),
        KernelKind::LinearIdentity => d,
        KernelKind::Off => 1.0,
    }
}

/// `(dF/d ln alpha, dF/d ln l)` at distance `d`.
fn shaped_grad(kind: KernelKind, d: f64, alpha: f64, l: f64) -> (f64, f64) {
    let r2 = (d - 1.0) * (d - 1.0);
    let f = shaped(kind, d, alpha, l);
    match kind {
        KernelKind::RationalQuadratic => {
            let u = r2 / (2.0 * alpha * l * l);
            let dlnf_dlnalpha = alpha * (u / (1.0 + u) - math::ln(1.0 + u));
            let dlnf_dlnl = 2.0 * alpha * u / (1.0 + u);
            (f * dlnf_dlnalpha, f * dlnf_dlnl)
        }
        KernelKind::Gaussian => (0.0, f * r2 / (l * l)),
        _ => (0.0, 0.0),
    }
}

/// The `n x n` matrix `F(D)_ij` (row `i` is the query) as a function of the
/// four raw kernel scalars.
pub(crate) struct KernelField {
    n: usize,
    dist: Vec<u32>,
    roles: Vec<QueryRole>,
    kind: KernelKind,
}

impl KernelField {
    pub(crate) fn new(dist: &DistanceMatrix, roles: &[QueryRole], kind: KernelKind) -> Self {
        KernelField { n: dist.n(), dist: dist.as_slice().to_vec(), roles: roles.to_vec(), kind }
    }
}

impl ParamField for KernelField {
    fn eval(&self, raw: &[f64]) -> Tensor {
        let params = KernelParams::from_raw(raw);
        let n = self.n;
        let mut out = Tensor::zeros(&[n, n]);
        for i in 0..n {
            let role = self.roles[i];
            let row = out.row_mut(i);
            for j in 0..n {
                row[j] = kernel_value(self.dist[i * n + j], role, &params, self.kind);
            }
        }
        out
    }

    fn vjp(&self, raw: &[f64], _out: &Tensor, grad_out: &Tensor) -> Vec<f64> {
        let params = KernelParams::from_raw(raw);
        let mut g = alloc::vec![0.0; KERNEL_SCALARS];
        if !self.kind.is_learnable() {
            return g;
        }
        let n = self.n;
        for i in 0..n {
            let (offset, (alpha, l)) = match self.roles[i] {
                QueryRole::Entity => (0, (params.alpha_o, params.l_o)),
                QueryRole::Predicate => (2, (params.alpha_p, params.l_p)),
                QueryRole::Other => continue,
            };
            for j in 0..n {
                let go = grad_out.at(i, j);
                if go == 0.0 {
                    continue;
                }
                let (da, dl) = shaped_grad(self.kind, f64::from(self.dist[i * n + j]), alpha, l);
                g[offset] += go * da;
                g[offset + 1] += go * dl;
            }
        }
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const E: QueryRole = QueryRole::Entity;

    fn kp(alpha: f64, l: f64) -> KernelParams {
        KernelParams { alpha_o: alpha, l_o: l, alpha_p: alpha, l_p: l }
    }

    #[test]
    fn substitution_examples() {
        let p = kp(1.0, 1.0);
        assert_eq!(kernel_value(1, E, &p, KernelKind::RationalQuadratic), 1.0);
        assert!((kernel_value(2, E, &p, KernelKind::RationalQuadratic) - 2.0 / 3.0).abs() < 1e-15);
        assert!((kernel_value(2, E, &p, KernelKind::Gaussian) - libm::exp(-0.5)).abs() < 1e-15);
        assert!((kernel_value(2, E, &p, KernelKind::Gaussian) - 0.606531).abs() < 1e-6);
        assert_eq!(kernel_value(5, E, &p, KernelKind::LinearIdentity), 5.0);
        assert_eq!(kernel_value(5, E, &p, KernelKind::Off), 1.0);
        assert_eq!(kernel_value(5, QueryRole::Other, &p, KernelKind::RationalQuadratic), 1.0);
    }

    #[test]
    fn role_split_uses_query_scalars() {
        let p = KernelParams { alpha_o: 1.0, l_o: 1.0, alpha_p: 2.0, l_p: 0.5 };
        let ent = kernel_value(3, QueryRole::Entity, &p, KernelKind::RationalQuadratic);
        let pred = kernel_value(3, QueryRole::Predicate, &p, KernelKind::RationalQuadratic);
        assert!((ent - 1.0 / 3.0).abs() < 1e-15);
        // (1 + 4 / (2 * 2 * 0.25))^-2 = 5^-2
        assert!((pred - 0.04).abs() < 1e-15);
    }

    #[test]
    fn raw_round_trip_and_default_init() {
        let p = KernelParams::from_raw(&[0.0; 4]);
        assert_eq!(p, KernelParams::default());
        let q = KernelParams { alpha_o: 0.3, l_o: 2.0, alpha_p: 1.7, l_p: 0.9 };
        let back = KernelParams::from_raw(&q.to_raw());
        assert!((back.alpha_o - 0.3).abs() < 1e-14 && (back.l_p - 0.9).abs() < 1e-14);
    }

    #[test]
    fn analytic_scalar_gradients_match_differences() {
        let h = 1e-6;
        for kind in [KernelKind::RationalQuadratic, KernelKind::Gaussian] {
            for (a, l) in [(0.5, 0.7), (1.0, 1.0), (3.0, 2.2)] {
                for d in 1..6 {
                    let d = d as f64;
                    let (da, dl) = shaped_grad(kind, d, a, l);
                    let ea = libm::exp(h);
                    let num_a = (shaped(kind, d, a * ea, l) - shaped(kind, d, a / ea, l)) / (2.0 * h);
                    let num_l = (shaped(kind, d, a, l * ea) - shaped(kind, d, a, l / ea)) / (2.0 * h);
                    assert!((da - num_a).abs() < 1e-8, "{kind} d={d} alpha grad");
                    assert!((dl - num_l).abs() < 1e-8, "{kind} d={d} l grad");
                }
            }
        }
    }
}

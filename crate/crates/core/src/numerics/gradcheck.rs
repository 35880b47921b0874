//! Central finite-difference gradient checking.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::index::sample;

use super::params::ParamStore;
use super::tape::{NodeId, Tape};
use crate::error::{bail, Result};
use crate::rng::rng_from;

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckOptions {
    pub epsilon: f64,
    pub tolerance: f64,
    /// Denominator floor for the relative error, so that near-zero
    /// gradients are compared on an absolute scale.
    pub abs_floor: f64,
    /// Check at most this many randomly chosen coordinates per parameter.
    pub max_coords_per_param: Option<usize>,
    pub seed: u64,
}

impl Default for GradCheckOptions {
    fn default() -> Self {
        GradCheckOptions { epsilon: 1e-5, tolerance: 1e-4, abs_floor: 1e-6, max_coords_per_param: None, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    /// `(parameter name, flat index, analytic, numeric)` of the worst coordinate.
    pub worst: Option<(String, usize, f64, f64)>,
    pub coords_checked: usize,
    pub tolerance: f64,
    pub passed: bool,
}

/// Checks every coordinate of every parameter.
pub fn finite_difference_check<F>(store: &mut ParamStore, f: F, epsilon: f64, tolerance: f64) -> Result<GradCheckReport>
where
    F: for<'a> Fn(&mut Tape<'a>) -> Result<NodeId>,
{
    let opts = GradCheckOptions { epsilon, tolerance, ..GradCheckOptions::default() };
    finite_difference_check_with(store, f, &opts)
}

/// `|analytic - numeric| / max(|analytic|, |numeric|, floor)`
pub fn relative_error(analytic: f64, numeric: f64, floor: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(floor)
}

pub fn finite_difference_check_with<F>(store: &mut ParamStore, f: F, opts: &GradCheckOptions) -> Result<GradCheckReport>
where
    F: for<'a> Fn(&mut Tape<'a>) -> Result<NodeId>,
{
    let analytic = {
        let mut tape = Tape::new(store);
        let loss = f(&mut tape)?;
        tape.backward(loss)?
    };
    let eval = |store: &ParamStore, name: &str, idx: usize| -> Result<f64> {
        let mut tape = Tape::new(store);
        let loss = f(&mut tape)?;
        let v = tape.value(loss).item();
        if !v.is_finite() {
            bail!(Numeric, "loss is {} when perturbing {}[{}]", v, name, idx);
        }
        Ok(v)
    };
    let mut rng = rng_from(opts.seed);
    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        worst: None,
        coords_checked: 0,
        tolerance: opts.tolerance,
        passed: true,
    };
    let ids: Vec<_> = store.ids().collect();
    for id in ids {
        let len = store.value(id).len();
        let name = store.get(id).name.clone();
        let coords: Vec<usize> = match opts.max_coords_per_param {
            Some(k) if k < len => {
                let mut v = sample(&mut rng, len, k).into_vec();
                v.sort_unstable();
                v
            }
            _ => (0..len).collect(),
        };
        for i in coords {
            let original = store.value(id).data()[i];
            store.value_mut(id).data_mut()[i] = original + opts.epsilon;
            let plus = eval(store, &name, i);
            store.value_mut(id).data_mut()[i] = original - opts.epsilon;
            let minus = eval(store, &name, i);
            store.value_mut(id).data_mut()[i] = original;
            let numeric = (plus? - minus?) / (2.0 * opts.epsilon);
            let a = analytic.get(id).map_or(0.0, |g| g.data()[i]);
            let err = relative_error(a, numeric, opts.abs_floor);
            report.coords_checked += 1;
            if err > report.max_rel_error || report.worst.is_none() {
                report.max_rel_error = report.max_rel_error.max(err);
                if err >= report.max_rel_error {
                    report.worst = Some((name.clone(), i, a, numeric));
                }
            }
        }
    }
    report.passed = report.max_rel_error < opts.tolerance;
    Ok(report)
}

impl core::fmt::Display for GradCheckReport {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        let worst = self
            .worst
            .as_ref()
            .map(|(n, i, a, num)| format!("{n}[{i}] analytic={a:e} numeric={num:e}"))
            .unwrap_or_default();
        write!(
            f,
            "{} coords, max rel err {:.3e} (tol {:e}) {}",
            self.coords_checked, self.max_rel_error, self.tolerance, worst
        )
    }
}

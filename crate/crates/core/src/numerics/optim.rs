use alloc::vec;
use alloc::vec::Vec;

use super::params::ParamStore;
use crate::error::{bail, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimizerKind {
    Sgd,
}

/// Step-decay SGD schedule. Epochs are numbered from 1; the learning rate is
/// multiplied by `decay_factor` once for every decay epoch `<= epoch`.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub kind: OptimizerKind,
    pub learning_rate: f64,
    pub decay_epochs: Vec<usize>,
    pub decay_factor: f64,
    pub epochs: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            kind: OptimizerKind::Sgd,
            learning_rate: 0.05,
            decay_epochs: vec![14, 18],
            decay_factor: 0.1,
            epochs: 20,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate >= 0.0) || !self.learning_rate.is_finite() {
            bail!(Config, "learning rate must be finite and >= 0, got {}", self.learning_rate);
        }
        if !(self.decay_factor > 0.0 && self.decay_factor <= 1.0) {
            bail!(Config, "decay factor must lie in (0, 1], got {}", self.decay_factor);
        }
        if self.epochs == 0 {
            bail!(Config, "epochs must be positive");
        }
        if self.decay_epochs.windows(2).any(|w| w[0] >= w[1]) {
            bail!(Config, "decay epochs must be strictly increasing: {:?}", self.decay_epochs);
        }
        if let Some(&last) = self.decay_epochs.last() {
            if last >= self.epochs {
                bail!(Config, "decay epoch {} is not below the epoch count {}", last, self.epochs);
            }
        }
        Ok(())
    }

    pub fn learning_rate_at(&self, epoch: usize) -> f64 {
        let decays = self.decay_epochs.iter().filter(|&&d| d <= epoch).count();
        let mut lr = self.learning_rate;
        for _ in 0..decays {
            lr *= self.decay_factor;
        }
        lr
    }
}

/// `theta <- theta - lr(epoch) * grad` for every parameter.
pub fn sgd_step(store: &mut ParamStore, config: &OptimizerConfig, epoch: usize) {
    let lr = config.learning_rate_at(epoch);
    if lr == 0.0 {
        return;
    }
    for p in store.iter_mut() {
        for (v, g) in p.value.data_mut().iter_mut().zip(p.grad.data()) {
            *v -= lr * g;
        }
    }
}

//! Dense tensors, a reverse-mode tape, losses, SGD and gradient checking.

pub mod functional;
mod gradcheck;
mod optim;
mod params;
mod tape;
mod tensor;

pub use functional::{
    class_balanced_weights, cross_entropy_probs, focal_loss, raw_class_balanced_weights, renormalize_rows,
    softmax_rows, PROB_CLAMP,
};
pub use gradcheck::{
    finite_difference_check, finite_difference_check_with, relative_error, GradCheckOptions, GradCheckReport,
};
pub use optim::{sgd_step, OptimizerConfig, OptimizerKind};
pub use params::{Gradients, ParamId, ParamStore, Parameter};
pub use tape::{NodeId, ParamField, Tape, LAYER_NORM_EPS};
pub use tensor::Tensor;

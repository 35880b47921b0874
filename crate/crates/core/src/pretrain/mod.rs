//! Masked node modeling: triplet-constrained masking of subjects, objects
//! or predicates, role-specific prediction heads, and an SGD loop.
//!
//! Each sample draws one task. Masking never hides two nodes of the same
//! triplet, so every masked node keeps at least part of its local context.

mod loss;
mod masking;
mod train;


pub use loss::{argmax as argmax_row, mnm_loss, LinearHead, MnmHeads, MnmLoss, MnmValues, RoleTerm};
pub use masking::{apply_masks, assign_task, plan_masks, target_mask_count, MaskTarget, MaskTask, MaskingPlan};
pub use train::{
    evaluate_mnm, predict_masked, pretrain_loop, EpochMetrics, PassMetrics, PretrainConfig, PretrainExample,
    PretrainModel,
};

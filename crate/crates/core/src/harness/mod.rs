//! Synthetic data and desk-scale experiments.
//!
//! Graphs come from a seeded generator with class-conditioned features.
//! The experiments are a hop/kernel ablation on a predicate task that is
//! solvable from direct neighbors, a long-tail loss study on a linear
//! probe, and a four-way answer scorer.

mod choice;
mod longtail;
mod relational;
mod stats;
mod synth;
mod vocab;

#[cfg(test)]
mod tests;

pub use choice::{
    choice_accuracy, choice_data_config, finetune_choices, generate_choice_samples, run_choice_experiment, score_choices,
    ChoiceConfig, ChoiceOutcome, ChoiceSample, ChoiceScorer, CHOICES,
};
pub use longtail::{
    longtail_data, loss_settings, per_class_recall, predict_linear, run_longtail_study, train_linear_probe, ClassProfile,
    LabeledFeatures, LongTailConfig, LongTailRow, LongTailRun, LongTailTable, LossKind,
};
pub use relational::{
    attention_maps, evaluate_relational, hop_kernel_grid, relational_data, relational_example, run_relational_task, train_relational,
    CellOutcome, GridCell, RelationalConfig, RelationalExample, RelationalModel, RelationalRow, RelationalTable,
};
pub use stats::mean_std;
pub use synth::{
    generate_corpus, generate_graph, render_caption, CaptionTemplates, LabelRule, NeighborTable, SyntheticConfig,
    SyntheticSample, SyntheticWorld, MAX_ENTITIES, MAX_PREDICATES,
};
pub use vocab::CaptionVocab;

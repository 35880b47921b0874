use scenegraph_core::graph::SceneGraph;
use scenegraph_core::harness::{
    choice_accuracy, choice_data_config, evaluate_relational, finetune_choices, generate_choice_samples, relational_data,
    train_relational, ChoiceConfig, ChoiceSample, ChoiceScorer, GridCell, LabelRule, RelationalConfig, RelationalModel,
    SyntheticConfig,
};
use scenegraph_core::numerics::{OptimizerConfig, ParamStore};
use scenegraph_core::rng::mix;

use super::{data_config, model_config, optimizer_config, PreviousRun, RunContext, DATA_STREAM, MODEL_STREAM};
use crate::error::{config_err, Result};
use crate::formats::{fmt_f64, Table};
use crate::settings::Settings;

pub(crate) enum Task {
    Relational,
    Choice,
}

pub(crate) fn task(s: &mut Settings) -> Result<Task> {
    match s.get("task", "relational".to_string())?.as_str() {
        "relational" => Ok(Task::Relational),
        "choice" => Ok(Task::Choice),
        other => Err(config_err!("unknown task `{other}` (expected relational or choice)")),
    }
}

pub(crate) struct RelationalSetup {
    pub config: RelationalConfig,
    pub model: RelationalModel,
    pub store: ParamStore,
    pub train: Vec<SceneGraph>,
    pub validation: Vec<SceneGraph>,
}

/// Relational-task keys; shared with `ablate-hops` except for the cell.
pub(crate) fn relational_config(s: &mut Settings) -> Result<(RelationalConfig, GridCell)> {
    let d = RelationalConfig::default();
    let data_defaults = SyntheticConfig { label_rule: LabelRule::NeighborDetermined, ..d.data.clone() };
    // the data seed is derived per run seed by `relational_data`
    let data = data_config(s, 0, data_defaults)?;
    let validation_fraction = s.get("validation_fraction", d.validation_fraction)?;
    let (embedding, encoder) = model_config(s, &data, d.embedding.hidden_dim, d.ff_dim)?;
    let cfg = RelationalConfig {
        data,
        validation_fraction,
        embedding,
        layers: encoder.layers,
        heads: encoder.heads,
        ff_dim: encoder.ff_dim,
        optimizer: optimizer_config(s, d.optimizer)?,
        batch_size: s.get("batch_size", d.batch_size)?,
    };
    cfg.validate()?;
    Ok((cfg, GridCell { hop_limit: encoder.hop_limit, kernel: encoder.kernel }))
}

pub(crate) fn relational_setup(s: &mut Settings, seed: u64) -> Result<RelationalSetup> {
    let (config, cell) = relational_config(s)?;
    let (train, validation) = relational_data(&config, seed)?;
    let mut store = ParamStore::new();
    let model = RelationalModel::new(&mut store, &config, cell, seed)?;
    Ok(RelationalSetup { config, model, store, train, validation })
}

pub(crate) struct ChoiceSetup {
    pub scorer: ChoiceScorer,
    pub store: ParamStore,
    pub train: Vec<ChoiceSample>,
    pub test: Vec<ChoiceSample>,
    pub optimizer: OptimizerConfig,
}

pub(crate) fn choice_setup(s: &mut Settings, seed: u64) -> Result<ChoiceSetup> {
    let d = ChoiceConfig::default();
    let data_defaults = choice_data_config(d.train_samples + d.test_samples, mix(seed, DATA_STREAM));
    let data = data_config(s, data_defaults.seed, data_defaults)?;
    let test_samples = s.get("test_samples", d.test_samples)?;
    if test_samples >= data.samples {
        return Err(config_err!("test_samples {} leaves no training samples out of {}", test_samples, data.samples));
    }
    let train_samples = data.samples - test_samples;
    let (embedding, encoder) = model_config(s, &data, d.embedding.hidden_dim, d.encoder.ff_dim)?;
    let optimizer = optimizer_config(s, d.optimizer)?;
    let mut samples = generate_choice_samples(&data)?;
    let test = samples.split_off(train_samples);
    let mut store = ParamStore::new();
    let scorer = ChoiceScorer::new(&mut store, embedding, encoder, mix(seed, MODEL_STREAM))?;
    Ok(ChoiceSetup { scorer, store, train: samples, test, optimizer })
}

fn curve_table(losses: &[f64], optimizer: &OptimizerConfig) -> Table {
    let mut t = Table::new(["epoch", "lr", "train_loss"]);
    for (i, l) in losses.iter().enumerate() {
        t.push([(i + 1).to_string(), fmt_f64(optimizer.learning_rate_at(i + 1)), fmt_f64(*l)]);
    }
    t
}

pub(crate) fn summary_table(rows: &[(&str, f64)]) -> Table {
    let mut t = Table::new(["metric", "value"]);
    for (name, v) in rows {
        t.push([name.to_string(), fmt_f64(*v)]);
    }
    t
}

/// Copies encoder weights from a finished `pretrain` or `train` run.
fn initialize(store: &mut ParamStore, init: Option<std::path::PathBuf>) -> Result<()> {
    let Some(dir) = init else { return Ok(()) };
    let restored = PreviousRun::open(&dir)?.checkpoint()?.restore(store, false)?;
    if restored == 0 {
        return Err(config_err!("{}: no parameter names match this model", dir.display()));
    }
    log::info!("initialized {restored} tensors from {}", dir.display());
    Ok(())
}

/// Supervised training of the predicate probe or the answer scorer.
pub fn train(mut ctx: RunContext) -> Result<()> {
    let seed = ctx.seed;
    let s = &mut ctx.settings;
    match task(s)? {
        Task::Relational => {
            let init = s.get_path("init");
            let mut setup = relational_setup(s, seed)?;
            s.finish()?;
            initialize(&mut setup.store, init)?;
            let out = train_relational(&mut setup.store, &setup.model, &setup.train, &setup.validation, &setup.config, seed)?;
            let train_accuracy = evaluate_relational(&mut setup.store, &setup.model, &setup.train)?;
            ctx.write_table("metrics.tsv", &curve_table(&out.train_loss, &setup.config.optimizer))?;
            let rows = [("train_accuracy", train_accuracy), ("validation_accuracy", out.validation_accuracy)];
            ctx.write_table("summary.tsv", &summary_table(&rows))?;
            ctx.write_checkpoint(&setup.store)?;
        }
        Task::Choice => {
            let init = s.get_path("init");
            let mut setup = choice_setup(s, seed)?;
            s.finish()?;
            initialize(&mut setup.store, init)?;
            let losses = finetune_choices(&mut setup.store, &setup.scorer, &setup.train, &setup.optimizer, seed)?;
            let rows = [
                ("train_accuracy", choice_accuracy(&setup.store, &setup.scorer, &setup.train)?),
                ("test_accuracy", choice_accuracy(&setup.store, &setup.scorer, &setup.test)?),
            ];
            ctx.write_table("metrics.tsv", &curve_table(&losses, &setup.optimizer))?;
            ctx.write_table("summary.tsv", &summary_table(&rows))?;
            ctx.write_checkpoint(&setup.store)?;
        }
    }
    ctx.finish()
}

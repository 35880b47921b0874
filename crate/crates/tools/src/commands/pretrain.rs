use scenegraph_core::harness::{generate_corpus, SyntheticConfig};
use scenegraph_core::numerics::ParamStore;
use scenegraph_core::pretrain::{
    pretrain_loop, EpochMetrics, MaskTask, PassMetrics, PretrainConfig, PretrainExample, PretrainModel,
};
use scenegraph_core::rng::mix;

use super::{data_config, load_generated, model_config, optimizer_config, RunContext, DATA_STREAM, MODEL_STREAM};
use crate::error::{config_err, Result};
use crate::formats::{fmt_f64, fmt_opt, Table};
use crate::settings::Settings;

/// Everything a pre-training run is built from.
pub(crate) struct PretrainSetup {
    pub model: PretrainModel,
    pub store: ParamStore,
    pub train: Vec<PretrainExample>,
    pub heldout: Vec<PretrainExample>,
    pub config: PretrainConfig,
}

pub(crate) fn pretrain_setup(s: &mut Settings, seed: u64) -> Result<PretrainSetup> {
    let defaults = SyntheticConfig { samples: 500, ..SyntheticConfig::default() };
    let data = data_config(s, mix(seed, DATA_STREAM), defaults)?;
    let heldout_count = s.get("heldout", 100usize)?;
    let with_text = s.get("text", true)?;
    let data_dir = s.get_path("data_dir");
    let (embedding, encoder) = model_config(s, &data, 64, None)?;
    let d = PretrainConfig::default();
    let config = PretrainConfig {
        mask_ratio: s.get("ratio", d.mask_ratio)?,
        optimizer: optimizer_config(s, d.optimizer)?,
        batch_size: s.get("batch_size", d.batch_size)?,
        text_mlm: s.get("text_mlm", d.text_mlm)?,
        text_mask_ratio: s.get("text_mask_ratio", d.text_mask_ratio)?,
    };
    config.validate()?;
    let examples: Vec<PretrainExample> = match &data_dir {
        Some(dir) => load_generated(dir)?.into_iter().map(|(graph, text)| PretrainExample { graph, text }).collect(),
        None => {
            let gen = SyntheticConfig { samples: data.samples + heldout_count, ..data };
            generate_corpus(&gen)?.into_iter().map(|s| PretrainExample { graph: s.graph, text: s.tokens }).collect()
        }
    };
    if examples.len() <= heldout_count {
        return Err(config_err!("{} examples leave nothing to train on after {} held-out", examples.len(), heldout_count));
    }
    let mut examples: Vec<PretrainExample> = if with_text {
        examples
    } else {
        examples.into_iter().map(|e| PretrainExample { text: Vec::new(), ..e }).collect()
    };
    let heldout = examples.split_off(examples.len() - heldout_count);
    let mut store = ParamStore::new();
    let model = PretrainModel::new(&mut store, embedding, encoder, config.text_mlm, mix(seed, MODEL_STREAM))?;
    Ok(PretrainSetup { model, store, train: examples, heldout, config })
}

pub(crate) const PASS_COLUMNS: [&str; 8] = ["l_mnm", "l_sbj", "l_obj", "l_rel", "acc_sbj", "acc_obj", "acc_rel", "l_mlm"];

pub(crate) fn pass_fields(m: &PassMetrics) -> Vec<String> {
    let mut row = vec![fmt_f64(m.l_mnm), fmt_f64(m.l_sbj), fmt_f64(m.l_obj), fmt_f64(m.l_rel)];
    row.extend(MaskTask::ALL.iter().map(|&t| fmt_opt(m.accuracy(t))));
    row.push(fmt_opt(m.l_mlm));
    row
}

pub(crate) fn metrics_table(log: &[EpochMetrics]) -> Table {
    let mut t = Table::new(["epoch", "split", "lr"].into_iter().chain(PASS_COLUMNS));
    for e in log {
        let passes = std::iter::once(("train", &e.train)).chain(e.heldout.as_ref().map(|h| ("heldout", h)));
        for (split, m) in passes {
            let mut row = vec![e.epoch.to_string(), split.to_string(), fmt_f64(e.learning_rate)];
            row.extend(pass_fields(m));
            t.push(row);
        }
    }
    t
}

/// Masked node modeling on synthetic (or `gen-data`) graphs with captions.
pub fn pretrain(mut ctx: RunContext) -> Result<()> {
    let mut setup = pretrain_setup(&mut ctx.settings, ctx.seed)?;
    ctx.settings.finish()?;
    log::info!("pre-training on {} samples, {} held out", setup.train.len(), setup.heldout.len());
    let log = pretrain_loop(&mut setup.store, &setup.model, &setup.train, &setup.heldout, &setup.config, ctx.seed)?;
    ctx.write_table("metrics.tsv", &metrics_table(&log))?;
    ctx.write_checkpoint(&setup.store)?;
    ctx.finish()
}

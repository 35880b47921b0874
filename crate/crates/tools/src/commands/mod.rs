//! Subcommand implementations and the configuration keys they share.

mod ablate;
mod data;
mod dump;
mod eval;
mod extract;
mod longtail;
mod pretrain;
mod train;

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use scenegraph_core::encoder::{EmbeddingConfig, EncoderConfig, KernelKind};
use scenegraph_core::harness::{CaptionTemplates, LabelRule, SyntheticConfig};
use scenegraph_core::numerics::{OptimizerConfig, ParamStore};

use crate::error::{config_err, IoContext, Result};
use crate::formats::{read_json, to_json, versions, Checkpoint, Manifest, Table};
use crate::settings::Settings;

pub use ablate::ablate_hops;
pub use data::{gen_data, load_generated};
pub use dump::{dump_attention, dump_kernels};
pub use eval::eval;
pub use extract::{extract_sg, read_documents};
pub use longtail::longtail;
pub use pretrain::pretrain;
pub use train::train;

/// Seed streams separating data generation from model initialization.
pub(crate) const DATA_STREAM: u64 = 0x6461_7461;
pub(crate) const MODEL_STREAM: u64 = 0x6d6f_6465;

/// Output directory, settings and bookkeeping for one invocation.
pub struct RunContext {
    pub command: &'static str,
    pub out: PathBuf,
    pub seed: u64,
    pub settings: Settings,
    pub threads: usize,
    outputs: Vec<String>,
    start: Instant,
}

impl RunContext {
    pub fn new(command: &'static str, out: PathBuf, mut settings: Settings, threads: usize) -> Result<Self> {
        let seed = settings.get("seed", 0u64)?;
        Ok(RunContext { command, out, seed, settings, threads, outputs: Vec::new(), start: Instant::now() })
    }

    fn target(&mut self, rel: &str) -> Result<PathBuf> {
        let path = self.out.join(rel);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).at(parent)?;
        }
        self.outputs.push(rel.to_string());
        Ok(path)
    }

    pub fn write_text(&mut self, rel: &str, text: &str) -> Result<()> {
        let path = self.target(rel)?;
        std::fs::write(&path, text).at(path)
    }

    pub fn write_json<T: Serialize>(&mut self, rel: &str, value: &T) -> Result<()> {
        self.write_text(rel, &to_json(value))
    }

    pub fn write_table(&mut self, rel: &str, table: &Table) -> Result<()> {
        self.write_text(rel, &table.render())
    }

    pub fn write_checkpoint(&mut self, store: &ParamStore) -> Result<()> {
        self.write_json("params.json", &Checkpoint::from_store(store))
    }

    /// Writes the resolved configuration and the manifest.
    pub fn finish(mut self) -> Result<()> {
        let config = self.settings.render();
        self.write_text("config.txt", &config)?;
        self.outputs.sort();
        let manifest = Manifest {
            command: self.command.to_string(),
            seed: self.seed,
            config: self.settings.resolved().clone(),
            versions: versions(),
            outputs: self.outputs.clone(),
            wall_time_seconds: self.start.elapsed().as_secs_f64(),
        };
        let path = self.out.join("manifest.json");
        std::fs::write(&path, to_json(&manifest)).at(path)
    }
}

/// A finished run directory: its manifest, settings and checkpoint.
pub(crate) struct PreviousRun {
    pub manifest: Manifest,
    pub settings: Settings,
    pub dir: PathBuf,
}

impl PreviousRun {
    pub fn open(dir: &Path) -> Result<Self> {
        let manifest: Manifest = read_json(&dir.join("manifest.json"))?;
        let mut settings = Settings::load(&dir.join("config.txt"))?;
        settings.set("seed", manifest.seed);
        Ok(PreviousRun { manifest, settings, dir: dir.to_path_buf() })
    }

    pub fn checkpoint(&self) -> Result<Checkpoint> {
        read_json(&self.dir.join("params.json"))
    }
}

fn parse_with<T: std::str::FromStr<Err = scenegraph_core::Error>>(s: &mut Settings, key: &str, default: &str) -> Result<T> {
    let raw = s.get(key, default.to_string())?;
    raw.parse().map_err(|e| config_err!("`{key}`: {e}"))
}

/// Synthetic-data keys. `seed` is the data seed, already separated from
/// the model seed by the caller.
pub(crate) fn data_config(s: &mut Settings, seed: u64, defaults: SyntheticConfig) -> Result<SyntheticConfig> {
    let d = defaults;
    Ok(SyntheticConfig {
        samples: s.get("samples", d.samples)?,
        entity_class_count: s.get("entity_classes", d.entity_class_count)?,
        predicate_class_count: s.get("predicate_classes", d.predicate_class_count)?,
        entities_per_graph: (s.get("min_entities", d.entities_per_graph.0)?, s.get("max_entities", d.entities_per_graph.1)?),
        predicates_per_graph: (
            s.get("min_predicates", d.predicates_per_graph.0)?,
            s.get("max_predicates", d.predicates_per_graph.1)?,
        ),
        caption_templates: parse_with::<CaptionTemplates>(s, "templates", d.caption_templates.as_str())?,
        max_caption_sentences: s.get("max_caption_sentences", d.max_caption_sentences)?,
        label_rule: parse_with::<LabelRule>(s, "label_rule", d.label_rule.as_str())?,
        feature_dim: s.get("feature_dim", d.feature_dim)?,
        feature_variance: s.get("feature_variance", d.feature_variance)?,
        seed,
    })
}

/// Embedding and encoder keys. Class counts and feature size follow the
/// data configuration.
pub(crate) fn model_config(
    s: &mut Settings,
    data: &SyntheticConfig,
    hidden_default: usize,
    ff_default: Option<usize>,
) -> Result<(EmbeddingConfig, EncoderConfig)> {
    let hidden = s.get("hidden_dim", hidden_default)?;
    let embedding = EmbeddingConfig {
        hidden_dim: hidden,
        entity_class_count: data.entity_class_count,
        predicate_class_count: data.predicate_class_count,
        visual_feature_dim: data.feature_dim,
        ..EmbeddingConfig::default()
    };
    let d = EncoderConfig::default();
    let encoder = EncoderConfig {
        layers: s.get("layers", d.layers)?,
        heads: s.get("heads", d.heads)?,
        hop_limit: s.get_opt("hop_limit", d.hop_limit)?,
        kernel: parse_with::<KernelKind>(s, "kernel", d.kernel.as_str())?,
        ff_dim: Some(s.get("ff_dim", ff_default.unwrap_or(4 * hidden))?),
        share_kernels: s.get("share_kernels", d.share_kernels)?,
    };
    embedding.validate()?;
    encoder.validate(hidden)?;
    Ok((embedding, encoder))
}

pub(crate) fn optimizer_config(s: &mut Settings, defaults: OptimizerConfig) -> Result<OptimizerConfig> {
    let epochs = s.get("epochs", defaults.epochs)?;
    // a shortened run keeps only the default decay points that still fall inside it
    let default_decay: Vec<usize> = defaults.decay_epochs.iter().copied().filter(|&e| e < epochs).collect();
    let cfg = OptimizerConfig {
        learning_rate: s.get("lr", defaults.learning_rate)?,
        epochs,
        decay_epochs: s.get_list("decay_epochs", &default_decay)?,
        decay_factor: s.get("decay_factor", defaults.decay_factor)?,
        ..defaults
    };
    cfg.validate()?;
    Ok(cfg)
}

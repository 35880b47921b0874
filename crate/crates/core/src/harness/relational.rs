use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use super::stats::mean_std;
use super::synth::{generate_corpus, LabelRule, SyntheticConfig};
use crate::encoder::{AttentionContext, EmbeddingConfig, Encoder, EncoderConfig, KernelKind, TokenInputs};
use crate::error::{bail, Result};
use crate::graph::{NodeRef, SceneGraph, TokenSequence};
use crate::numerics::{sgd_step, OptimizerConfig, ParamStore, Tape, Tensor};
use crate::pretrain::LinearHead;
use crate::rng::{mix, rng_from};

/// One encoder variant of the hop/kernel grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridCell {
    /// `None` is conventional attention without hop masking.
    pub hop_limit: Option<u32>,
    pub kernel: KernelKind,
}

impl GridCell {
    pub fn baseline() -> Self {
        GridCell { hop_limit: None, kernel: KernelKind::Off }
    }

    pub fn label(&self) -> String {
        match self.hop_limit {
            None => String::from("baseline"),
            Some(h) => format!("{}-hop {}", h, self.kernel),
        }
    }
}

/// Baseline followed by hop limits {1, 3, 6} crossed with the identity,
/// Gaussian and rational quadratic rescalers.
pub fn hop_kernel_grid() -> Vec<GridCell> {
    let mut grid = vec![GridCell::baseline()];
    for h in [1, 3, 6] {
        for kernel in [KernelKind::LinearIdentity, KernelKind::Gaussian, KernelKind::RationalQuadratic] {
            grid.push(GridCell { hop_limit: Some(h), kernel });
        }
    }
    grid
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelationalConfig {
    pub data: SyntheticConfig,
    /// Share of the generated graphs held out for validation.
    pub validation_fraction: f64,
    pub embedding: EmbeddingConfig,
    pub layers: usize,
    pub heads: usize,
    pub ff_dim: Option<usize>,
    pub optimizer: OptimizerConfig,
    pub batch_size: usize,
}

impl Default for RelationalConfig {
    fn default() -> Self {
        let data = SyntheticConfig { samples: 400, label_rule: LabelRule::NeighborDetermined, ..SyntheticConfig::default() };
        RelationalConfig {
            embedding: EmbeddingConfig {
                hidden_dim: 32,
                entity_class_count: data.entity_class_count,
                predicate_class_count: data.predicate_class_count,
                visual_feature_dim: data.feature_dim,
                ..EmbeddingConfig::default()
            },
            data,
            validation_fraction: 0.25,
            layers: 2,
            heads: 4,
            ff_dim: Some(64),
            optimizer: OptimizerConfig { learning_rate: 0.05, epochs: 20, decay_epochs: vec![14, 18], ..OptimizerConfig::default() },
            batch_size: 2,
        }
    }
}

impl RelationalConfig {
    pub fn encoder_config(&self, cell: GridCell) -> EncoderConfig {
        EncoderConfig {
            layers: self.layers,
            heads: self.heads,
            hop_limit: cell.hop_limit,
            kernel: cell.kernel,
            ff_dim: self.ff_dim,
            share_kernels: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.data.label_rule != LabelRule::NeighborDetermined {
            bail!(Config, "the relational task needs neighbor-determined predicate labels");
        }
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0) {
            bail!(Config, "validation fraction must lie in (0, 1)");
        }
        if self.batch_size == 0 {
            bail!(Config, "batch size must be positive");
        }
        self.optimizer.validate()
    }
}

/// Encoder with a predicate-class probe on top.
#[derive(Debug, Clone, PartialEq)]
pub struct RelationalModel {
    pub encoder: Encoder,
    pub probe: LinearHead,
}

impl RelationalModel {
    pub fn new(store: &mut ParamStore, cfg: &RelationalConfig, cell: GridCell, seed: u64) -> Result<Self> {
        let encoder = Encoder::new(store, cfg.embedding.clone(), cfg.encoder_config(cell), mix(seed, 0))?;
        let mut rng = rng_from(mix(seed, 1));
        let probe = LinearHead::new(store, "probe", encoder.hidden_dim(), cfg.embedding.predicate_class_count, &mut rng);
        Ok(RelationalModel { encoder, probe })
    }
}

/// Encoder inputs with every predicate masked, plus the rows and gold
/// classes of the predicates.
pub struct RelationalExample {
    pub inputs: TokenInputs,
    pub ctx: AttentionContext,
    pub rows: Vec<usize>,
    pub gold: Vec<usize>,
}

pub fn relational_example(encoder: &Encoder, g: &SceneGraph) -> Result<RelationalExample> {
    let seq = TokenSequence::build(&[], g);
    let mut inputs = encoder.inputs(&seq, g)?;
    let ctx = encoder.context(&seq, g)?;
    let mut rows = Vec::with_capacity(g.predicates().len());
    let mut gold = Vec::with_capacity(g.predicates().len());
    for (p, node) in g.predicates().iter().enumerate() {
        let row = seq.position_of(NodeRef::Predicate(p)).expect("every predicate has a token");
        inputs.mask_row(row);
        rows.push(row);
        gold.push(node.class_id);
    }
    Ok(RelationalExample { inputs, ctx, rows, gold })
}

/// Returns `(loss, correct)` for one example and accumulates gradients
/// into `store` when `train` is set.
fn relational_step(store: &mut ParamStore, model: &RelationalModel, ex: &RelationalExample, train: bool) -> Result<(f64, usize)> {
    if ex.rows.is_empty() {
        return Ok((0.0, 0));
    }
    let (value, correct, grads) = {
        let mut tape = Tape::new(store);
        let trace = model.encoder.forward(&mut tape, &ex.inputs, &ex.ctx)?;
        let x = tape.select_rows(trace.hidden, ex.rows.clone())?;
        let logits = model.probe.apply(&mut tape, x)?;
        let loss = tape.cross_entropy(logits, ex.gold.clone())?;
        let value = tape.value(loss).item();
        if !value.is_finite() {
            bail!(Numeric, "non-finite relational loss {}", value);
        }
        let l = tape.value(logits);
        let correct = ex.gold.iter().enumerate().filter(|&(r, &g)| crate::pretrain::argmax_row(l.row(r)) == g).count();
        let grads = if train { Some(tape.backward(loss)?) } else { None };
        (value, correct, grads)
    };
    if let Some(g) = grads {
        store.accumulate(&g);
    }
    Ok((value, correct))
}

/// Training curve and validation accuracy of one grid cell and seed.
#[derive(Debug, Clone, PartialEq)]
pub struct CellOutcome {
    pub train_loss: Vec<f64>,
    pub validation_accuracy: f64,
}

/// Trains one model on pre-split data.
pub fn train_relational(
    store: &mut ParamStore,
    model: &RelationalModel,
    train: &[SceneGraph],
    validation: &[SceneGraph],
    cfg: &RelationalConfig,
    seed: u64,
) -> Result<CellOutcome> {
    let train_ex: Vec<RelationalExample> = train.iter().map(|g| relational_example(&model.encoder, g)).collect::<Result<_>>()?;
    let val_ex: Vec<RelationalExample> = validation.iter().map(|g| relational_example(&model.encoder, g)).collect::<Result<_>>()?;
    let mut train_loss = Vec::with_capacity(cfg.optimizer.epochs);
    for epoch in 1..=cfg.optimizer.epochs {
        let mut order: Vec<usize> = (0..train_ex.len()).collect();
        order.shuffle(&mut rng_from(mix(seed, epoch as u64)));
        let mut total = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            store.zero_grad();
            for &i in batch {
                total += relational_step(store, model, &train_ex[i], true)?.0;
            }
            store.scale_grads(1.0 / batch.len() as f64);
            sgd_step(store, &cfg.optimizer, epoch);
        }
        train_loss.push(total / train_ex.len().max(1) as f64);
    }
    Ok(CellOutcome { train_loss, validation_accuracy: relational_accuracy(store, model, &val_ex)? })
}

fn relational_accuracy(store: &mut ParamStore, model: &RelationalModel, examples: &[RelationalExample]) -> Result<f64> {
    let (mut correct, mut count) = (0, 0);
    for ex in examples {
        correct += relational_step(store, model, ex, false)?.1;
        count += ex.rows.len();
    }
    Ok(if count == 0 { f64::NAN } else { correct as f64 / count as f64 })
}

/// Fraction of masked predicates classified correctly over `graphs`.
pub fn evaluate_relational(store: &mut ParamStore, model: &RelationalModel, graphs: &[SceneGraph]) -> Result<f64> {
    let examples: Vec<RelationalExample> = graphs.iter().map(|g| relational_example(&model.encoder, g)).collect::<Result<_>>()?;
    relational_accuracy(store, model, &examples)
}

/// Generates the data for `seed` and splits it into train and validation.
pub fn relational_data(cfg: &RelationalConfig, seed: u64) -> Result<(Vec<SceneGraph>, Vec<SceneGraph>)> {
    let data = SyntheticConfig { seed: mix(seed, 0x4441_5441), ..cfg.data.clone() };
    let corpus = generate_corpus(&data)?;
    let n_val = crate::math::round(corpus.len() as f64 * cfg.validation_fraction) as usize;
    let n_train = corpus.len() - n_val;
    let mut graphs: Vec<SceneGraph> = corpus.into_iter().map(|s| s.graph).collect();
    let val = graphs.split_off(n_train);
    Ok((graphs, val))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelationalRow {
    pub cell: GridCell,
    /// Validation accuracy per seed; NaN marks a diverged run.
    pub accuracies: Vec<f64>,
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelationalTable {
    pub seeds: Vec<u64>,
    pub rows: Vec<RelationalRow>,
}

impl RelationalTable {
    pub fn row(&self, cell: GridCell) -> Option<&RelationalRow> {
        self.rows.iter().find(|r| r.cell == cell)
    }
}

/// Trains every grid cell for every seed on the same per-seed data.
/// A run that fails numerically is recorded as NaN and the grid continues.
pub fn run_relational_task(cfg: &RelationalConfig, grid: &[GridCell], seeds: &[u64]) -> Result<RelationalTable> {
    cfg.validate()?;
    for cell in grid {
        cfg.encoder_config(*cell).validate(cfg.embedding.hidden_dim)?;
    }
    let data: Vec<_> = seeds.iter().map(|&s| relational_data(cfg, s)).collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(grid.len());
    for &cell in grid {
        let mut accuracies = Vec::with_capacity(seeds.len());
        for (&seed, (train, val)) in seeds.iter().zip(&data) {
            let mut store = ParamStore::new();
            let model = RelationalModel::new(&mut store, cfg, cell, seed)?;
            let acc = match train_relational(&mut store, &model, train, val, cfg, seed) {
                Ok(out) => out.validation_accuracy,
                Err(e) if e.is_numeric() => {
                    log::warn!("{} seed {}: {}", cell.label(), seed, e);
                    f64::NAN
                }
                Err(e) => return Err(e),
            };
            log::info!("{} seed {}: validation accuracy {:.4}", cell.label(), seed, acc);
            accuracies.push(acc);
        }
        let (mean, std) = mean_std(&accuracies);
        rows.push(RelationalRow { cell, accuracies, mean, std });
    }
    Ok(RelationalTable { seeds: seeds.to_vec(), rows })
}

/// Attention matrices `[layer][head]` of a trained encoder on one graph.
pub fn attention_maps(store: &ParamStore, encoder: &Encoder, g: &SceneGraph, text: &[usize]) -> Result<Vec<Vec<Tensor>>> {
    let seq = TokenSequence::build(text, g);
    let inputs = encoder.inputs(&seq, g)?;
    let ctx = encoder.context(&seq, g)?;
    let mut tape = Tape::new(store);
    let trace = encoder.forward(&mut tape, &inputs, &ctx)?;
    Ok(trace.attention.iter().map(|heads| heads.iter().map(|&h| tape.value(h).clone()).collect()).collect())
}

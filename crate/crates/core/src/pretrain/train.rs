use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use super::loss::{argmax, mnm_loss, LinearHead, MnmHeads, MnmValues};
use super::masking::{apply_masks, assign_task, plan_masks, MaskTask};
use crate::encoder::{AttentionContext, EmbeddingConfig, Encoder, EncoderConfig, TokenInputs};
use crate::error::{bail, Result};
use crate::graph::{SceneGraph, Token, TokenSequence};
use crate::numerics::{sgd_step, OptimizerConfig, ParamStore, Tape};
use crate::rng::{mix, rng_from};

/// A scene graph paired with its caption token ids.
#[derive(Debug, Clone, PartialEq)]
pub struct PretrainExample {
    pub graph: SceneGraph,
    pub text: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PretrainConfig {
    pub mask_ratio: f64,
    pub optimizer: OptimizerConfig,
    /// Samples whose gradients are averaged per SGD step.
    pub batch_size: usize,
    /// Also mask and predict caption words.
    pub text_mlm: bool,
    pub text_mask_ratio: f64,
}

impl Default for PretrainConfig {
    fn default() -> Self {
        PretrainConfig {
            mask_ratio: 0.3,
            // per-sample updates; the fine-tuning rate of 0.05 stalls here
            optimizer: OptimizerConfig { learning_rate: 0.01, decay_epochs: alloc::vec![18], ..OptimizerConfig::default() },
            batch_size: 1,
            text_mlm: false,
            text_mask_ratio: 0.15,
        }
    }
}

impl PretrainConfig {
    pub fn validate(&self) -> Result<()> {
        self.optimizer.validate()?;
        if !(self.mask_ratio > 0.0 && self.mask_ratio <= 1.0) {
            bail!(Config, "mask ratio must lie in (0, 1], got {}", self.mask_ratio);
        }
        if !(self.text_mask_ratio > 0.0 && self.text_mask_ratio <= 1.0) {
            bail!(Config, "text mask ratio must lie in (0, 1], got {}", self.text_mask_ratio);
        }
        if self.batch_size == 0 {
            bail!(Config, "batch size must be positive");
        }
        Ok(())
    }
}

/// Encoder plus the pre-training heads.
#[derive(Debug, Clone, PartialEq)]
pub struct PretrainModel {
    pub encoder: Encoder,
    pub heads: MnmHeads,
    pub text_head: Option<LinearHead>,
}

impl PretrainModel {
    pub fn new(
        store: &mut ParamStore,
        embedding: EmbeddingConfig,
        encoder: EncoderConfig,
        text_mlm: bool,
        seed: u64,
    ) -> Result<Self> {
        let encoder = Encoder::new(store, embedding, encoder, mix(seed, 0))?;
        let mut rng = rng_from(mix(seed, 1));
        let h = encoder.hidden_dim();
        let cfg = &encoder.embedding_config;
        let heads = MnmHeads::new(store, h, cfg.entity_class_count, cfg.predicate_class_count, &mut rng);
        let text_head = text_mlm.then(|| LinearHead::new(store, "mlm.word", h, cfg.text_vocab_size, &mut rng));
        Ok(PretrainModel { encoder, heads, text_head })
    }
}

/// Aggregated losses and accuracies over one pass. Per-role losses are
/// summed over samples and divided by the sample count, so
/// `l_mnm = l_sbj + l_obj + l_rel`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PassMetrics {
    pub samples: usize,
    pub l_mnm: f64,
    pub l_sbj: f64,
    pub l_obj: f64,
    pub l_rel: f64,
    /// Masked-node `(correct, count)` per role.
    pub counts: [(usize, usize); 3],
    pub l_mlm: Option<f64>,
}

impl PassMetrics {
    pub fn accuracy(&self, task: MaskTask) -> Option<f64> {
        let (c, n) = self.counts[task.index()];
        (n > 0).then(|| c as f64 / n as f64)
    }

    fn add(&mut self, v: &MnmValues, counts: [(usize, usize); 3]) {
        self.samples += 1;
        self.l_mnm += v.total;
        self.l_sbj += v.sbj;
        self.l_obj += v.obj;
        self.l_rel += v.rel;
        for (acc, c) in self.counts.iter_mut().zip(counts) {
            acc.0 += c.0;
            acc.1 += c.1;
        }
    }

    fn finish(&mut self) {
        let n = self.samples.max(1) as f64;
        self.l_mnm /= n;
        self.l_sbj /= n;
        self.l_obj /= n;
        self.l_rel /= n;
        if let Some(l) = self.l_mlm.as_mut() {
            *l /= n;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub learning_rate: f64,
    pub train: PassMetrics,
    pub heldout: Option<PassMetrics>,
}

struct Prepared {
    seq: TokenSequence,
    inputs: TokenInputs,
    ctx: AttentionContext,
}

fn prepare(model: &PretrainModel, samples: &[PretrainExample]) -> Result<Vec<Prepared>> {
    samples
        .iter()
        .map(|ex| {
            let seq = TokenSequence::build(&ex.text, &ex.graph);
            let inputs = model.encoder.inputs(&seq, &ex.graph)?;
            let ctx = model.encoder.context(&seq, &ex.graph)?;
            Ok(Prepared { seq, inputs, ctx })
        })
        .collect()
}

/// Outcome of one masked forward pass.
struct StepResult {
    values: MnmValues,
    counts: [(usize, usize); 3],
    mlm: Option<f64>,
    grads: Option<crate::numerics::Gradients>,
}

fn run_sample(
    store: &ParamStore,
    model: &PretrainModel,
    ex: &PretrainExample,
    prep: &Prepared,
    cfg: &PretrainConfig,
    seed: u64,
    task: Option<MaskTask>,
    want_grads: bool,
) -> Result<Option<StepResult>> {
    let task = task.unwrap_or_else(|| assign_task(mix(seed, 0)));
    let plan = plan_masks(&ex.graph, task, cfg.mask_ratio, mix(seed, 1))?;
    let mut inputs = prep.inputs.clone();
    let targets = apply_masks(&prep.seq, &mut inputs, &ex.graph, &plan)?;
    let mut text_targets = Vec::new();
    if model.text_head.is_some() {
        let mut rng = rng_from(mix(seed, 2));
        for (i, tok) in prep.seq.tokens().iter().enumerate() {
            if let Token::Text(w) = tok {
                if rng.random_bool(cfg.text_mask_ratio) {
                    text_targets.push((i, *w));
                }
            }
        }
        for &(i, _) in &text_targets {
            inputs.mask_row(i);
        }
    }
    if targets.is_empty() && text_targets.is_empty() {
        return Ok(None);
    }
    let mut tape = Tape::new(store);
    let trace = model.encoder.forward(&mut tape, &inputs, &prep.ctx)?;
    let loss = mnm_loss(&mut tape, trace.hidden, &targets, &model.heads)?;
    let values = loss.values(&tape);
    let counts = loss.accuracy_counts(&tape);
    let mut objective = loss.total;
    let mut mlm = None;
    if let (Some(head), false) = (&model.text_head, text_targets.is_empty()) {
        let (rows, gold): (Vec<usize>, Vec<usize>) = text_targets.iter().copied().unzip();
        let x = tape.select_rows(trace.hidden, rows)?;
        let logits = head.apply(&mut tape, x)?;
        let l = tape.cross_entropy(logits, gold)?;
        mlm = Some(tape.value(l).item());
        objective = tape.add(objective, l)?;
    }
    let value = tape.value(objective).item();
    if !value.is_finite() {
        bail!(
            Numeric,
            "non-finite pre-training loss {}: task {}, masked {:?}, terms sbj={} obj={} rel={} mlm={:?}",
            value,
            task,
            plan.masked_node_ids,
            values.sbj,
            values.obj,
            values.rel,
            mlm
        );
    }
    let grads = if want_grads { Some(tape.backward(objective)?) } else { None };
    Ok(Some(StepResult { values, counts, mlm, grads }))
}

const HELDOUT_STREAM: u64 = 0x4845_4c44;

/// Masked-node metrics on `samples` with fixed masks. Every sample is
/// evaluated once under each of the three tasks, and each of those passes
/// counts as one sample in the averages.
pub fn evaluate_mnm(
    store: &ParamStore,
    model: &PretrainModel,
    samples: &[PretrainExample],
    cfg: &PretrainConfig,
    seed: u64,
) -> Result<PassMetrics> {
    let prepared = prepare(model, samples)?;
    let base = mix(seed, HELDOUT_STREAM);
    let mut metrics = PassMetrics::default();
    for (i, (ex, prep)) in samples.iter().zip(&prepared).enumerate() {
        for task in MaskTask::ALL {
            if let Some(r) = run_sample(store, model, ex, prep, cfg, mix(base, i as u64), Some(task), false)? {
                metrics.add(&r.values, r.counts);
                if let Some(l) = r.mlm {
                    *metrics.l_mlm.get_or_insert(0.0) += l;
                }
            }
        }
    }
    metrics.finish();
    Ok(metrics)
}

/// Runs masked node modeling with SGD over `train` for the configured
/// number of epochs, evaluating on `heldout` after each epoch when it is
/// non-empty.
pub fn pretrain_loop(
    store: &mut ParamStore,
    model: &PretrainModel,
    train: &[PretrainExample],
    heldout: &[PretrainExample],
    cfg: &PretrainConfig,
    seed: u64,
) -> Result<Vec<EpochMetrics>> {
    cfg.validate()?;
    if train.is_empty() {
        bail!(Validation, "pre-training corpus is empty");
    }
    let prepared = prepare(model, train)?;
    let mut log = Vec::with_capacity(cfg.optimizer.epochs);
    for epoch in 1..=cfg.optimizer.epochs {
        let epoch_seed = mix(seed, epoch as u64);
        let mut order: Vec<usize> = (0..train.len()).collect();
        order.shuffle(&mut rng_from(mix(epoch_seed, u64::MAX)));
        let mut metrics = PassMetrics::default();
        for batch in order.chunks(cfg.batch_size) {
            store.zero_grad();
            let mut stepped = 0;
            for &i in batch {
                let result = run_sample(store, model, &train[i], &prepared[i], cfg, mix(epoch_seed, i as u64), None, true)
                    .map_err(|e| annotate(e, epoch, i))?;
                let Some(r) = result else { continue };
                metrics.add(&r.values, r.counts);
                if let Some(l) = r.mlm {
                    *metrics.l_mlm.get_or_insert(0.0) += l;
                }
                if let Some(g) = &r.grads {
                    store.accumulate(g);
                    stepped += 1;
                }
            }
            if stepped > 0 {
                store.scale_grads(1.0 / stepped as f64);
                sgd_step(store, &cfg.optimizer, epoch);
            }
        }
        metrics.finish();
        let heldout = if heldout.is_empty() { None } else { Some(evaluate_mnm(store, model, heldout, cfg, seed)?) };
        log::info!(
            "epoch {epoch}: L_MNM {:.4} (sbj {:.4} obj {:.4} rel {:.4})",
            metrics.l_mnm,
            metrics.l_sbj,
            metrics.l_obj,
            metrics.l_rel
        );
        log.push(EpochMetrics { epoch, learning_rate: cfg.optimizer.learning_rate_at(epoch), train: metrics, heldout });
    }
    Ok(log)
}

fn annotate(e: crate::Error, epoch: usize, sample: usize) -> crate::Error {
    match e {
        crate::Error::Numeric(m) => crate::Error::Numeric(alloc::format!("epoch {epoch}, sample {sample}: {m}")),
        other => other,
    }
}

/// Predicted class for every masked node of one sample, for inspection.
pub fn predict_masked(
    store: &ParamStore,
    model: &PretrainModel,
    ex: &PretrainExample,
    task: MaskTask,
    ratio: f64,
    seed: u64,
) -> Result<Vec<(crate::graph::NodeRef, usize, usize)>> {
    let seq = TokenSequence::build(&ex.text, &ex.graph);
    let mut inputs = model.encoder.inputs(&seq, &ex.graph)?;
    let ctx = model.encoder.context(&seq, &ex.graph)?;
    let plan = plan_masks(&ex.graph, task, ratio, seed)?;
    let targets = apply_masks(&seq, &mut inputs, &ex.graph, &plan)?;
    let mut tape = Tape::new(store);
    let trace = model.encoder.forward(&mut tape, &inputs, &ctx)?;
    let loss = mnm_loss(&mut tape, trace.hidden, &targets, &model.heads)?;
    let Some(term) = &loss.terms[task.index()] else { return Ok(Vec::new()) };
    let logits = tape.value(term.logits);
    Ok(targets.iter().enumerate().map(|(r, t)| (t.node, t.class_id, argmax(logits.row(r)))).collect())
}

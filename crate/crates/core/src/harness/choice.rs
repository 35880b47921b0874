use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use super::synth::{generate_corpus, LabelRule, SyntheticConfig};
use super::vocab::CaptionVocab;
use crate::encoder::{EmbeddingConfig, Encoder, EncoderConfig};
use crate::error::{bail, Result};
use crate::graph::{SceneGraph, TokenSequence};
use crate::numerics::{sgd_step, NodeId, OptimizerConfig, ParamStore, Tape};
use crate::pretrain::LinearHead;
use crate::rng::{mix, rng_from};
use crate::weaksg::Lexicon;

pub const CHOICES: usize = 4;

/// A graph, a question and four candidate answers.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiceSample {
    pub graph: SceneGraph,
    pub question: Vec<usize>,
    pub candidates: Vec<Vec<usize>>,
    pub gold: usize,
}

impl ChoiceSample {
    pub fn validate(&self) -> Result<()> {
        if self.candidates.len() != CHOICES {
            bail!(Validation, "expected {} candidates, got {}", CHOICES, self.candidates.len());
        }
        if self.gold >= CHOICES {
            bail!(Validation, "gold index {} out of range", self.gold);
        }
        Ok(())
    }
}

/// Questions of the form `what is the <subject> doing ?` about the first
/// triplet. Candidates are `<verb> the <object>`; the gold verb names the
/// triplet's predicate and the distractor verbs occur nowhere in the graph.
pub fn generate_choice_samples(cfg: &SyntheticConfig) -> Result<Vec<ChoiceSample>> {
    let lexicon = Lexicon::default();
    let vocab = CaptionVocab::new(&lexicon);
    if cfg.predicates_per_graph.1 + CHOICES - 1 > cfg.predicate_class_count {
        bail!(Config, "need {} absent predicate classes per graph for distractors", CHOICES - 1);
    }
    let corpus = generate_corpus(cfg)?;
    let word = |w: &str| vocab.id(w).expect("lexicon word in vocabulary");
    corpus
        .into_iter()
        .enumerate()
        .map(|(i, s)| {
            let mut rng = rng_from(mix(cfg.seed, 0x4348_4f49 + i as u64));
            let g = s.graph;
            let t = g.triplets()[0];
            let subject = &lexicon.nouns[g.entities()[t.subject].class_id].lemma;
            let object = &lexicon.nouns[g.entities()[t.object].class_id].lemma;
            let question = vec![word("what"), word("is"), word("the"), word(subject), word("doing"), word("?")];
            let gold_class = g.predicates()[t.predicate].class_id;
            let mut absent: Vec<usize> =
                (0..cfg.predicate_class_count).filter(|c| g.predicates().iter().all(|p| p.class_id != *c)).collect();
            absent.shuffle(&mut rng);
            let mut classes: Vec<usize> = absent[..CHOICES - 1].to_vec();
            let gold = rng.random_range(0..CHOICES);
            classes.insert(gold, gold_class);
            let candidates = classes
                .iter()
                .map(|&c| vec![word(&lexicon.verbs[c].progressive), word("the"), word(object)])
                .collect();
            Ok(ChoiceSample { graph: g, question, candidates, gold })
        })
        .collect()
}

/// Encoder with a linear scorer on the first token of each pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiceScorer {
    pub encoder: Encoder,
    pub score: LinearHead,
}

impl ChoiceScorer {
    pub fn new(store: &mut ParamStore, embedding: EmbeddingConfig, encoder: EncoderConfig, seed: u64) -> Result<Self> {
        let encoder = Encoder::new(store, embedding, encoder, mix(seed, 0))?;
        let mut rng = rng_from(mix(seed, 1));
        let score = LinearHead::new(store, "choice.score", encoder.hidden_dim(), 1, &mut rng);
        Ok(ChoiceScorer { encoder, score })
    }

    /// `1 x 4` row of candidate scores.
    pub fn scores(&self, tape: &mut Tape<'_>, sample: &ChoiceSample) -> Result<NodeId> {
        sample.validate()?;
        let g = &sample.graph;
        let mut parts = Vec::with_capacity(CHOICES);
        for cand in &sample.candidates {
            let seq = TokenSequence::with_segments(&[&sample.question, cand], g);
            let inputs = self.encoder.inputs(&seq, g)?;
            let ctx = self.encoder.context(&seq, g)?;
            let trace = self.encoder.forward(tape, &inputs, &ctx)?;
            let first = tape.select_rows(trace.hidden, vec![0])?;
            parts.push(self.score.apply(tape, first)?);
        }
        tape.concat_cols(&parts)
    }
}

/// Softmax over the four pair scores.
pub fn score_choices(store: &ParamStore, scorer: &ChoiceScorer, sample: &ChoiceSample) -> Result<[f64; CHOICES]> {
    let mut tape = Tape::new(store);
    let scores = scorer.scores(&mut tape, sample)?;
    let probs = crate::numerics::functional::softmax_rows(tape.value(scores), &crate::numerics::Tensor::zeros(&[1, CHOICES]))?;
    let mut out = [0.0; CHOICES];
    out.copy_from_slice(probs.data());
    Ok(out)
}

pub fn choice_accuracy(store: &ParamStore, scorer: &ChoiceScorer, samples: &[ChoiceSample]) -> Result<f64> {
    let mut correct = 0;
    for s in samples {
        let p = score_choices(store, scorer, s)?;
        correct += (crate::pretrain::argmax_row(&p) == s.gold) as usize;
    }
    Ok(correct as f64 / samples.len().max(1) as f64)
}

/// Cross-entropy fine-tuning over the four scores; returns the mean loss
/// of every epoch.
pub fn finetune_choices(
    store: &mut ParamStore,
    scorer: &ChoiceScorer,
    samples: &[ChoiceSample],
    optimizer: &OptimizerConfig,
    seed: u64,
) -> Result<Vec<f64>> {
    optimizer.validate()?;
    let mut curve = Vec::with_capacity(optimizer.epochs);
    for epoch in 1..=optimizer.epochs {
        let mut order: Vec<usize> = (0..samples.len()).collect();
        order.shuffle(&mut rng_from(mix(seed, epoch as u64)));
        let mut total = 0.0;
        for &i in &order {
            let grads = {
                let mut tape = Tape::new(store);
                let scores = scorer.scores(&mut tape, &samples[i])?;
                let loss = tape.cross_entropy(scores, vec![samples[i].gold])?;
                let v = tape.value(loss).item();
                if !v.is_finite() {
                    bail!(Numeric, "non-finite choice loss at epoch {}, sample {}", epoch, i);
                }
                total += v;
                tape.backward(loss)?
            };
            store.zero_grad();
            store.accumulate(&grads);
            sgd_step(store, optimizer, epoch);
        }
        curve.push(total / samples.len().max(1) as f64);
    }
    Ok(curve)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChoiceConfig {
    pub train_samples: usize,
    pub test_samples: usize,
    pub embedding: EmbeddingConfig,
    pub encoder: EncoderConfig,
    pub optimizer: OptimizerConfig,
}

impl Default for ChoiceConfig {
    fn default() -> Self {
        ChoiceConfig {
            train_samples: 200,
            test_samples: 100,
            embedding: EmbeddingConfig { hidden_dim: 32, ..EmbeddingConfig::default() },
            encoder: EncoderConfig { ff_dim: Some(64), ..EncoderConfig::default() },
            optimizer: OptimizerConfig { learning_rate: 0.01, ..OptimizerConfig::default() },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChoiceOutcome {
    pub train_loss: Vec<f64>,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
}

/// Generates train and test samples from one seed, fine-tunes a fresh
/// scorer and reports accuracies.
pub fn run_choice_experiment(cfg: &ChoiceConfig, seed: u64) -> Result<ChoiceOutcome> {
    let all = generate_choice_samples(&choice_data_config(cfg.train_samples + cfg.test_samples, seed))?;
    let (train, test) = all.split_at(cfg.train_samples);
    let mut store = ParamStore::new();
    let scorer = ChoiceScorer::new(&mut store, cfg.embedding.clone(), cfg.encoder.clone(), mix(seed, 2))?;
    let train_loss = finetune_choices(&mut store, &scorer, train, &cfg.optimizer, seed)?;
    Ok(ChoiceOutcome {
        train_loss,
        train_accuracy: choice_accuracy(&store, &scorer, train)?,
        test_accuracy: choice_accuracy(&store, &scorer, test)?,
    })
}

/// Data settings for the choice task: at most four predicates per graph so
/// three distractor verbs are always available.
pub fn choice_data_config(samples: usize, seed: u64) -> SyntheticConfig {
    SyntheticConfig { samples, predicates_per_graph: (1, 4), label_rule: LabelRule::Random, seed, ..SyntheticConfig::default() }
}

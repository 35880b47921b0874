//! Token embeddings.
//!
//! Text tokens use a vocabulary table plus a learned positional index.
//! Entity and predicate tokens use *separate* feature projections, and both
//! add a shared projection of their box (entity box or union box). Special
//! tokens have their own table. Every token also adds a modality-type vector.

use alloc::vec;
use alloc::vec::Vec;

use rand_distr::{Distribution, Normal};

use super::EmbeddingConfig;
use crate::error::{bail, Result};
use crate::graph::{NodeRef, SceneGraph, SpecialToken, Token, TokenSequence};
use crate::numerics::{NodeId, ParamId, ParamStore, Tape, Tensor};
use crate::rng::Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingParams {
    pub word: ParamId,
    pub text_position: ParamId,
    pub special: ParamId,
    pub modality: ParamId,
    pub entity_w: ParamId,
    pub entity_b: ParamId,
    pub predicate_w: ParamId,
    pub predicate_b: ParamId,
    pub position_w: ParamId,
    pub position_b: ParamId,
}

pub(crate) fn normal(rng: &mut Rng, rows: usize, cols: usize, std: f64) -> Tensor {
    let dist = Normal::new(0.0, std).expect("positive std");
    let data = (0..rows * cols).map(|_| dist.sample(rng)).collect();
    Tensor::matrix(rows, cols, data).expect("consistent shape")
}

impl EmbeddingParams {
    pub fn new(store: &mut ParamStore, cfg: &EmbeddingConfig, rng: &mut Rng) -> Self {
        let h = cfg.hidden_dim;
        let f = cfg.visual_feature_dim;
        let table_std = 0.5;
        let proj_std = |fan_in: usize| 1.0 / libm::sqrt(fan_in as f64);
        EmbeddingParams {
            word: store.add("emb.word", normal(rng, cfg.text_vocab_size, h, table_std)),
            text_position: store.add("emb.text_position", normal(rng, cfg.max_text_positions, h, table_std)),
            special: store.add("emb.special", normal(rng, SpecialToken::COUNT, h, table_std)),
            modality: store.add("emb.modality", normal(rng, crate::graph::Modality::COUNT, h, table_std)),
            entity_w: store.add("emb.entity_w", normal(rng, f, h, proj_std(f))),
            entity_b: store.add("emb.entity_b", Tensor::zeros(&[1, h])),
            predicate_w: store.add("emb.predicate_w", normal(rng, f, h, proj_std(f))),
            predicate_b: store.add("emb.predicate_b", Tensor::zeros(&[1, h])),
            position_w: store.add("emb.position_w", normal(rng, cfg.position_feature_dim, h, proj_std(4))),
            position_b: store.add("emb.position_b", Tensor::zeros(&[1, h])),
        }
    }

    /// Sums every embedding component for the rows of `inputs`.
    pub fn forward(&self, tape: &mut Tape<'_>, inputs: &TokenInputs) -> Result<NodeId> {
        let p = |tape: &mut Tape<'_>, id| tape.param(id);
        let word = p(tape, self.word);
        let mut acc = tape.lookup(word, inputs.word_ids.clone())?;
        let parts: [(ParamId, &Vec<Option<usize>>); 3] = [
            (self.text_position, &inputs.text_positions),
            (self.special, &inputs.special_ids),
            (self.modality, &inputs.modality_ids),
        ];
        for (table, idx) in parts {
            let t = p(tape, table);
            let e = tape.lookup(t, idx.clone())?;
            acc = tape.add(acc, e)?;
        }
        let projections = [
            (&inputs.entity_features, self.entity_w, self.entity_b, &inputs.entity_content),
            (&inputs.predicate_features, self.predicate_w, self.predicate_b, &inputs.predicate_content),
            (&inputs.boxes, self.position_w, self.position_b, &inputs.box_rows),
        ];
        for (features, w, b, rows) in projections {
            if rows.iter().all(Option::is_none) {
                continue;
            }
            let x = tape.constant(features.clone());
            let w = p(tape, w);
            let proj = tape.matmul(x, w)?;
            let b = p(tape, b);
            let bias = tape.lookup(b, rows.clone())?;
            let sum = tape.add(proj, bias)?;
            acc = tape.add(acc, sum)?;
        }
        Ok(acc)
    }
}

/// Per-token lookup indices and feature rows for one sequence. Masking
/// edits this description, so a masked token keeps its box and modality
/// contributions while its content is replaced by the `[MASK]` vector.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenInputs {
    pub word_ids: Vec<Option<usize>>,
    pub text_positions: Vec<Option<usize>>,
    pub special_ids: Vec<Option<usize>>,
    pub modality_ids: Vec<Option<usize>>,
    pub entity_features: Tensor,
    pub entity_content: Vec<Option<usize>>,
    pub predicate_features: Tensor,
    pub predicate_content: Vec<Option<usize>>,
    pub boxes: Tensor,
    pub box_rows: Vec<Option<usize>>,
}

impl TokenInputs {
    pub fn build(seq: &TokenSequence, g: &SceneGraph, cfg: &EmbeddingConfig) -> Result<Self> {
        seq.validate_against(g)?;
        let n = seq.len();
        let f = cfg.visual_feature_dim;
        let mut inputs = TokenInputs {
            word_ids: vec![None; n],
            text_positions: vec![None; n],
            special_ids: vec![None; n],
            modality_ids: vec![None; n],
            entity_features: Tensor::zeros(&[n, f]),
            entity_content: vec![None; n],
            predicate_features: Tensor::zeros(&[n, f]),
            predicate_content: vec![None; n],
            boxes: Tensor::zeros(&[n, cfg.position_feature_dim]),
            box_rows: vec![None; n],
        };
        let mut text_index = 0;
        for (i, token) in seq.tokens().iter().enumerate() {
            inputs.modality_ids[i] = Some(token.modality().index());
            match *token {
                Token::Text(v) => {
                    if v >= cfg.text_vocab_size {
                        bail!(Validation, "text token {} outside vocabulary of {}", v, cfg.text_vocab_size);
                    }
                    if text_index >= cfg.max_text_positions {
                        bail!(Validation, "more than {} text tokens", cfg.max_text_positions);
                    }
                    inputs.word_ids[i] = Some(v);
                    inputs.text_positions[i] = Some(text_index);
                    text_index += 1;
                }
                Token::Special(s) => inputs.special_ids[i] = Some(s.index()),
                Token::Entity(e) => {
                    let node = &g.entities()[e];
                    copy_feature(&mut inputs.entity_features, i, &node.feature, f)?;
                    inputs.entity_content[i] = Some(0);
                    inputs.boxes.row_mut(i).copy_from_slice(&node.bbox.0);
                    inputs.box_rows[i] = Some(0);
                }
                Token::Predicate(p) => {
                    let node = &g.predicates()[p];
                    copy_feature(&mut inputs.predicate_features, i, &node.feature, f)?;
                    inputs.predicate_content[i] = Some(0);
                    inputs.boxes.row_mut(i).copy_from_slice(&node.union_bbox.0);
                    inputs.box_rows[i] = Some(0);
                }
            }
        }
        Ok(inputs)
    }

    pub fn len(&self) -> usize {
        self.modality_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modality_ids.is_empty()
    }

    /// Replaces the content of row `i` with the `[MASK]` vector, keeping its
    /// position (box) and modality contributions.
    pub fn mask_row(&mut self, i: usize) {
        self.word_ids[i] = None;
        self.text_positions[i] = None;
        self.entity_content[i] = None;
        self.predicate_content[i] = None;
        self.entity_features.row_mut(i).fill(0.0);
        self.predicate_features.row_mut(i).fill(0.0);
        self.special_ids[i] = Some(SpecialToken::Mask.index());
    }
}

fn copy_feature(dst: &mut Tensor, row: usize, feature: &[f64], dim: usize) -> Result<()> {
    if feature.len() != dim {
        bail!(Shape, "visual feature has length {}, configured {}", feature.len(), dim);
    }
    dst.row_mut(row).copy_from_slice(feature);
    Ok(())
}

/// Embeds every token of `seq` and returns the `n x hidden` matrix.
pub fn embed_tokens(
    seq: &TokenSequence,
    g: &SceneGraph,
    cfg: &EmbeddingConfig,
    store: &ParamStore,
    params: &EmbeddingParams,
) -> Result<Tensor> {
    let inputs = TokenInputs::build(seq, g, cfg)?;
    let mut tape = Tape::new(store);
    let out = params.forward(&mut tape, &inputs)?;
    Ok(tape.value(out).clone())
}

/// Position of `node` in `seq`, as an error when absent.
pub(crate) fn position_of(seq: &TokenSequence, node: NodeRef) -> Result<usize> {
    match seq.position_of(node) {
        Some(p) => Ok(p),
        None => bail!(Validation, "node {:?} has no token in the sequence", node),
    }
}

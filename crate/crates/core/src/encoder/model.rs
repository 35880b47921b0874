use alloc::format;
use alloc::vec::Vec;

use super::attention::{multihop_attention, AttentionContext, AttentionParams, HeadParams};
use super::embedding::{normal, EmbeddingParams, TokenInputs};
use super::kernel::{KernelParams, KERNEL_SCALARS};
use super::{EmbeddingConfig, EncoderConfig};
use crate::error::Result;
use crate::graph::{SceneGraph, TokenSequence};
use crate::numerics::{NodeId, ParamId, ParamStore, Tape, Tensor};
use crate::rng::rng_from;

#[derive(Debug, Clone, PartialEq)]
pub struct LayerParams {
    pub attention: AttentionParams,
    pub ln1_gamma: ParamId,
    pub ln1_beta: ParamId,
    pub ff1_w: ParamId,
    pub ff1_b: ParamId,
    pub ff2_w: ParamId,
    pub ff2_b: ParamId,
    pub ln2_gamma: ParamId,
    pub ln2_beta: ParamId,
}

/// Embeddings followed by `L` post-norm multihop Transformer blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct Encoder {
    pub embedding_config: EmbeddingConfig,
    pub config: EncoderConfig,
    pub embedding: EmbeddingParams,
    pub layers: Vec<LayerParams>,
}

/// Node handles produced by one encoder pass.
pub struct EncoderTrace {
    pub embeddings: NodeId,
    pub hidden: NodeId,
    /// `attention[layer][head]`: rescaled attention matrices.
    pub attention: Vec<Vec<NodeId>>,
}

impl Encoder {
    /// Registers all encoder parameters in `store`, initialized from `seed`.
    pub fn new(store: &mut ParamStore, embedding_config: EmbeddingConfig, config: EncoderConfig, seed: u64) -> Result<Self> {
        embedding_config.validate()?;
        config.validate(embedding_config.hidden_dim)?;
        let mut rng = rng_from(seed);
        let h = embedding_config.hidden_dim;
        let d_k = h / config.heads;
        let ff = config.ff_width(h);
        let embedding = EmbeddingParams::new(store, &embedding_config, &mut rng);
        let std = |fan_in: usize| 1.0 / libm::sqrt(fan_in as f64);
        let shared_kernels: Option<Vec<ParamId>> = config.share_kernels.then(|| {
            (0..config.heads)
                .map(|k| store.add(format!("kernel.shared.head{k}"), Tensor::zeros(&[1, KERNEL_SCALARS])))
                .collect()
        });
        let mut layers = Vec::with_capacity(config.layers);
        for l in 0..config.layers {
            let mut heads = Vec::with_capacity(config.heads);
            for k in 0..config.heads {
                let name = |part: &str| format!("layer{l}.head{k}.{part}");
                let mut add_w = |store: &mut ParamStore, part: &str| store.add(name(part), normal(&mut rng, h, d_k, std(h)));
                let wq = add_w(store, "wq");
                let wk = add_w(store, "wk");
                let wv = add_w(store, "wv");
                let bq = store.add(name("bq"), Tensor::zeros(&[1, d_k]));
                let bk = store.add(name("bk"), Tensor::zeros(&[1, d_k]));
                let bv = store.add(name("bv"), Tensor::zeros(&[1, d_k]));
                let kernel = match &shared_kernels {
                    Some(shared) => shared[k],
                    None => store.add(name("kernel"), Tensor::zeros(&[1, KERNEL_SCALARS])),
                };
                heads.push(HeadParams { wq, bq, wk, bk, wv, bv, kernel });
            }
            let name = |part: &str| format!("layer{l}.{part}");
            let attention = AttentionParams {
                heads,
                wo: store.add(name("wo"), normal(&mut rng, h, h, std(h))),
                bo: store.add(name("bo"), Tensor::zeros(&[1, h])),
            };
            layers.push(LayerParams {
                attention,
                ln1_gamma: store.add(name("ln1_gamma"), Tensor::filled(&[1, h], 1.0)),
                ln1_beta: store.add(name("ln1_beta"), Tensor::zeros(&[1, h])),
                ff1_w: store.add(name("ff1_w"), normal(&mut rng, h, ff, std(h))),
                ff1_b: store.add(name("ff1_b"), Tensor::zeros(&[1, ff])),
                ff2_w: store.add(name("ff2_w"), normal(&mut rng, ff, h, std(ff))),
                ff2_b: store.add(name("ff2_b"), Tensor::zeros(&[1, h])),
                ln2_gamma: store.add(name("ln2_gamma"), Tensor::filled(&[1, h], 1.0)),
                ln2_beta: store.add(name("ln2_beta"), Tensor::zeros(&[1, h])),
            });
        }
        Ok(Encoder { embedding_config, config, embedding, layers })
    }

    pub fn hidden_dim(&self) -> usize {
        self.embedding_config.hidden_dim
    }

    pub fn inputs(&self, seq: &TokenSequence, g: &SceneGraph) -> Result<TokenInputs> {
        TokenInputs::build(seq, g, &self.embedding_config)
    }

    pub fn context(&self, seq: &TokenSequence, g: &SceneGraph) -> Result<AttentionContext> {
        AttentionContext::for_sequence(seq, g, &self.config)
    }

    pub fn forward(&self, tape: &mut Tape<'_>, inputs: &TokenInputs, ctx: &AttentionContext) -> Result<EncoderTrace> {
        let embeddings = self.embedding.forward(tape, inputs)?;
        self.forward_from(tape, embeddings, ctx)
    }

    /// Runs the Transformer blocks on precomputed embeddings.
    pub fn forward_from(&self, tape: &mut Tape<'_>, embeddings: NodeId, ctx: &AttentionContext) -> Result<EncoderTrace> {
        let mut hidden = embeddings;
        let mut attention = Vec::with_capacity(self.layers.len());
        for layer in &self.layers {
            let attn = multihop_attention(tape, hidden, ctx, &layer.attention, self.config.kernel)?;
            attention.push(attn.weights);
            let res = tape.add(hidden, attn.output)?;
            let (g1, b1) = (tape.param(layer.ln1_gamma), tape.param(layer.ln1_beta));
            let normed = tape.layer_norm(res, g1, b1)?;
            let (w1, c1) = (tape.param(layer.ff1_w), tape.param(layer.ff1_b));
            let inner = tape.linear(normed, w1, Some(c1))?;
            let act = tape.gelu(inner);
            let (w2, c2) = (tape.param(layer.ff2_w), tape.param(layer.ff2_b));
            let ffn = tape.linear(act, w2, Some(c2))?;
            let res2 = tape.add(normed, ffn)?;
            let (g2, b2) = (tape.param(layer.ln2_gamma), tape.param(layer.ln2_beta));
            hidden = tape.layer_norm(res2, g2, b2)?;
        }
        Ok(EncoderTrace { embeddings, hidden, attention })
    }

    /// Mapped kernel scalars of one head.
    pub fn kernel_params(&self, store: &ParamStore, layer: usize, head: usize) -> KernelParams {
        KernelParams::from_raw(store.value(self.layers[layer].attention.heads[head].kernel).data())
    }
}

/// One-shot forward pass returning the final hidden states.
pub fn encoder_forward(
    seq: &TokenSequence,
    g: &SceneGraph,
    encoder: &Encoder,
    store: &ParamStore,
) -> Result<Tensor> {
    let inputs = encoder.inputs(seq, g)?;
    let ctx = encoder.context(seq, g)?;
    let mut tape = Tape::new(store);
    let trace = encoder.forward(&mut tape, &inputs, &ctx)?;
    Ok(tape.value(trace.hidden).clone())
}

//! Token embeddings and the multihop graph Transformer encoder.

mod attention;
mod config;
mod embedding;
mod kernel;
mod model;

pub use attention::{hop_mask, multihop_attention, AttentionContext, AttentionOutput, AttentionParams, HeadParams};
pub use config::{EmbeddingConfig, EncoderConfig, KernelKind};
pub use embedding::{embed_tokens, EmbeddingParams, TokenInputs};
pub(crate) use embedding::{normal, position_of};
pub use kernel::{kernel_value, KernelParams, KERNEL_SCALARS};
pub use model::{encoder_forward, Encoder, EncoderTrace, LayerParams};

#[cfg(test)]
mod tests;

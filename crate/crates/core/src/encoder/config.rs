use core::fmt;
use core::str::FromStr;

use crate::error::{bail, Error, Result};

/// Distance kernel `F` used to rescale attention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelKind {
    RationalQuadratic,
    Gaussian,
    /// `F(d) = d`; ablation only, not decreasing.
    LinearIdentity,
    /// `F = 1`: no rescaling.
    Off,
}

impl KernelKind {
    pub const ALL: [KernelKind; 4] =
        [KernelKind::RationalQuadratic, KernelKind::Gaussian, KernelKind::LinearIdentity, KernelKind::Off];

    pub fn as_str(self) -> &'static str {
        match self {
            KernelKind::RationalQuadratic => "rq",
            KernelKind::Gaussian => "gaussian",
            KernelKind::LinearIdentity => "identity",
            KernelKind::Off => "off",
        }
    }

    pub fn is_learnable(self) -> bool {
        matches!(self, KernelKind::RationalQuadratic | KernelKind::Gaussian)
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "rq" | "rational_quadratic" | "rational-quadratic" => KernelKind::RationalQuadratic,
            "gaussian" => KernelKind::Gaussian,
            "identity" | "linear" | "linear_identity" => KernelKind::LinearIdentity,
            "off" | "none" => KernelKind::Off,
            other => bail!(Config, "unknown kernel kind `{}` (expected rq, gaussian, identity or off)", other),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingConfig {
    pub hidden_dim: usize,
    pub text_vocab_size: usize,
    pub entity_class_count: usize,
    pub predicate_class_count: usize,
    pub visual_feature_dim: usize,
    pub position_feature_dim: usize,
    /// Number of learned positional slots for text tokens.
    pub max_text_positions: usize,
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        EmbeddingConfig {
            hidden_dim: 64,
            text_vocab_size: 64,
            entity_class_count: 12,
            predicate_class_count: 8,
            visual_feature_dim: 16,
            position_feature_dim: 4,
            max_text_positions: 48,
        }
    }
}

impl EmbeddingConfig {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("hidden_dim", self.hidden_dim),
            ("text_vocab_size", self.text_vocab_size),
            ("entity_class_count", self.entity_class_count),
            ("predicate_class_count", self.predicate_class_count),
            ("visual_feature_dim", self.visual_feature_dim),
            ("max_text_positions", self.max_text_positions),
        ];
        for (name, v) in fields {
            if v == 0 {
                bail!(Config, "{} must be positive", name);
            }
        }
        if self.position_feature_dim != 4 {
            bail!(Config, "position features are 4 box coordinates, got {}", self.position_feature_dim);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncoderConfig {
    pub layers: usize,
    pub heads: usize,
    /// Attention beyond this many hops is masked; `None` disables hop
    /// masking entirely (the conventional Transformer baseline).
    pub hop_limit: Option<u32>,
    pub kernel: KernelKind,
    /// Feed-forward width; `None` means `4 * hidden_dim`.
    pub ff_dim: Option<usize>,
    /// One set of kernel scalars per head shared by all layers.
    pub share_kernels: bool,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        EncoderConfig {
            layers: 2,
            heads: 4,
            hop_limit: Some(3),
            kernel: KernelKind::RationalQuadratic,
            ff_dim: None,
            share_kernels: false,
        }
    }
}

impl EncoderConfig {
    /// The conventional Transformer: no hop mask, no kernel.
    pub fn vanilla() -> Self {
        EncoderConfig { hop_limit: None, kernel: KernelKind::Off, ..Self::default() }
    }

    pub fn validate(&self, hidden_dim: usize) -> Result<()> {
        if self.heads == 0 {
            bail!(Config, "heads must be positive");
        }
        if hidden_dim % self.heads != 0 {
            bail!(Config, "hidden_dim {} is not divisible by {} heads", hidden_dim, self.heads);
        }
        if self.hop_limit == Some(0) {
            bail!(Config, "hop limit must be at least 1");
        }
        if self.ff_dim == Some(0) {
            bail!(Config, "feed-forward width must be positive");
        }
        Ok(())
    }

    pub fn ff_width(&self, hidden_dim: usize) -> usize {
        self.ff_dim.unwrap_or(4 * hidden_dim)
    }
}

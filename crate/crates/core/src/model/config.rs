use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::ClipMode;

/// How the sentence and fact contexts are combined.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FusionMode {
    /// `c = [c_x; c_r]`.
    Concat,
    /// `g = σ(W_g [c_x; c_r] + b_g)`, `c = g ⊙ c_x + (1 − g) ⊙ c_r`.
    Gated,
}

impl std::str::FromStr for FusionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "concat" => Ok(FusionMode::Concat),
            "gated" => Ok(FusionMode::Gated),
            other => Err(Error::Invalid(format!(
                "unknown fusion mode {other:?} (expected concat or gated)"
            ))),
        }
    }
}

impl std::fmt::Display for FusionMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FusionMode::Concat => "concat",
            FusionMode::Gated => "gated",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub embed_dim: usize,
    pub hidden_dim: usize,
    /// Width of the additive attention scorers.
    pub attn_dim: usize,
    /// Width of the readout vector `o_t`.
    pub readout_dim: usize,
    pub fusion: FusionMode,
    pub source_vocab: usize,
    pub target_vocab: usize,
    pub dropout: f64,
    /// Sentence and fact encoders look up one shared source embedding table.
    pub share_embeddings: bool,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            embed_dim: 200,
            hidden_dim: 400,
            attn_dim: 400,
            readout_dim: 200,
            fusion: FusionMode::Gated,
            source_vocab: 0,
            target_vocab: 0,
            dropout: 0.5,
            share_embeddings: true,
        }
    }
}

impl ModelConfig {
    /// Square model with attention width = hidden and readout width = embed.
    pub fn with_dims(embed: usize, hidden: usize, source_vocab: usize, target_vocab: usize, fusion: FusionMode) -> Self {
        ModelConfig {
            embed_dim: embed,
            hidden_dim: hidden,
            attn_dim: hidden,
            readout_dim: embed,
            fusion,
            source_vocab,
            target_vocab,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let dims = [
            ("embed_dim", self.embed_dim),
            ("hidden_dim", self.hidden_dim),
            ("attn_dim", self.attn_dim),
            ("readout_dim", self.readout_dim),
            ("source_vocab", self.source_vocab),
            ("target_vocab", self.target_vocab),
        ];
        for (name, v) in dims {
            if v == 0 {
                return Err(Error::Invalid(format!("{name} must be positive")));
            }
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::Invalid(format!("dropout must lie in [0, 1), got {}", self.dropout)));
        }
        Ok(())
    }

    /// Width of an encoder state row (forward and backward halves).
    pub fn state_dim(&self) -> usize {
        2 * self.hidden_dim
    }

    /// Width of the fused context fed to the decoder.
    pub fn context_dim(&self) -> usize {
        match self.fusion {
            FusionMode::Concat => 4 * self.hidden_dim,
            FusionMode::Gated => 2 * self.hidden_dim,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub lr: f64,
    pub batch_size: usize,
    /// Batches between development-set evaluations.
    pub validate_every: usize,
    /// Non-improving validations tolerated before the learning rate is halved.
    pub patience: usize,
    pub clip: ClipMode,
    pub max_epochs: usize,
    /// Hard cap on optimizer steps, if any.
    pub max_steps: Option<usize>,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lr: 0.001,
            batch_size: 32,
            validate_every: 2000,
            patience: 10,
            clip: ClipMode::Value { lo: -5.0, hi: 5.0 },
            max_epochs: 10,
            max_steps: None,
            seed: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr >= 0.0) || !self.lr.is_finite() {
            return Err(Error::Invalid(format!("lr must be finite and non-negative, got {}", self.lr)));
        }
        if self.batch_size == 0 || self.validate_every == 0 || self.patience == 0 {
            return Err(Error::Invalid(
                "batch_size, validate_every and patience must be positive".into(),
            ));
        }
        Ok(())
    }
}

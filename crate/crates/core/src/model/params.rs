use rand::Rng;

use super::config::{FusionMode, ModelConfig};
use crate::error::{Error, Result};
use crate::impl_named_tensors;
use crate::nn::init::glorot_uniform;
use crate::nn::{AttentionParams, GruParams, NamedTensors, Tensor};

/// Context gate `σ(W [c_x; c_r] + b)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GateParams {
    pub w: Tensor,
    pub b: Tensor,
}

impl_named_tensors!(GateParams { w, b });

/// Every trainable tensor of the summarizer. Gradients use the same type.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    pub src_embed: Tensor,
    /// Separate fact embedding table when embeddings are not shared.
    pub fact_embed: Option<FactEmbedding>,
    pub tgt_embed: Tensor,
    pub sent_fwd: GruParams,
    pub sent_bwd: GruParams,
    pub fact_fwd: GruParams,
    pub fact_bwd: GruParams,
    pub init_w: Tensor,
    pub init_b: Tensor,
    pub attn_sent: AttentionParams,
    pub attn_fact: AttentionParams,
    pub gate: Option<GateParams>,
    pub decoder: GruParams,
    pub out_word: Tensor,
    pub out_ctx: Tensor,
    pub out_state: Tensor,
    pub out_proj: Tensor,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FactEmbedding {
    pub table: Tensor,
}

impl_named_tensors!(FactEmbedding { table });

impl_named_tensors!(ModelParams {
    src_embed,
    fact_embed,
    tgt_embed,
    sent_fwd,
    sent_bwd,
    fact_fwd,
    fact_bwd,
    init_w,
    init_b,
    attn_sent,
    attn_fact,
    gate,
    decoder,
    out_word,
    out_ctx,
    out_state,
    out_proj,
});

impl ModelParams {
    pub fn zeros(cfg: &ModelConfig) -> Self {
        let (e, h, a, m) = (cfg.embed_dim, cfg.hidden_dim, cfg.attn_dim, cfg.readout_dim);
        let c = cfg.context_dim();
        ModelParams {
            src_embed: Tensor::zeros(&[cfg.source_vocab, e]),
            fact_embed: (!cfg.share_embeddings).then(|| FactEmbedding {
                table: Tensor::zeros(&[cfg.source_vocab, e]),
            }),
            tgt_embed: Tensor::zeros(&[cfg.target_vocab, e]),
            sent_fwd: GruParams::zeros(e, h),
            sent_bwd: GruParams::zeros(e, h),
            fact_fwd: GruParams::zeros(e, h),
            fact_bwd: GruParams::zeros(e, h),
            init_w: Tensor::zeros(&[h, 2 * h]),
            init_b: Tensor::zeros(&[h]),
            attn_sent: AttentionParams::zeros(h, 2 * h, a),
            attn_fact: AttentionParams::zeros(h, 2 * h, a),
            gate: (cfg.fusion == FusionMode::Gated).then(|| GateParams {
                w: Tensor::zeros(&[2 * h, 4 * h]),
                b: Tensor::zeros(&[2 * h]),
            }),
            decoder: GruParams::zeros(e + c, h),
            out_word: Tensor::zeros(&[m, e]),
            out_ctx: Tensor::zeros(&[m, c]),
            out_state: Tensor::zeros(&[m, h]),
            out_proj: Tensor::zeros(&[cfg.target_vocab, m]),
        }
    }

    /// Glorot-uniform weights and embeddings, zero biases (the gate bias
    /// included).
    pub fn init<R: Rng + ?Sized>(cfg: &ModelConfig, rng: &mut R) -> Self {
        let (e, h, a, m) = (cfg.embed_dim, cfg.hidden_dim, cfg.attn_dim, cfg.readout_dim);
        let c = cfg.context_dim();
        ModelParams {
            src_embed: glorot_uniform(cfg.source_vocab, e, rng),
            fact_embed: (!cfg.share_embeddings).then(|| FactEmbedding {
                table: glorot_uniform(cfg.source_vocab, e, rng),
            }),
            tgt_embed: glorot_uniform(cfg.target_vocab, e, rng),
            sent_fwd: GruParams::init(e, h, rng),
            sent_bwd: GruParams::init(e, h, rng),
            fact_fwd: GruParams::init(e, h, rng),
            fact_bwd: GruParams::init(e, h, rng),
            init_w: glorot_uniform(h, 2 * h, rng),
            init_b: Tensor::zeros(&[h]),
            attn_sent: AttentionParams::init(h, 2 * h, a, rng),
            attn_fact: AttentionParams::init(h, 2 * h, a, rng),
            gate: (cfg.fusion == FusionMode::Gated).then(|| GateParams {
                w: glorot_uniform(2 * h, 4 * h, rng),
                b: Tensor::zeros(&[2 * h]),
            }),
            decoder: GruParams::init(e + c, h, rng),
            out_word: glorot_uniform(m, e, rng),
            out_ctx: glorot_uniform(m, c, rng),
            out_state: glorot_uniform(m, h, rng),
            out_proj: glorot_uniform(cfg.target_vocab, m, rng),
        }
    }

    /// A zero tensor set with the same layout.
    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        z.zero();
        z
    }

    pub fn fact_table(&self) -> &Tensor {
        self.fact_embed.as_ref().map_or(&self.src_embed, |f| &f.table)
    }

    /// Fact embedding table and both fact GRUs, borrowed together.
    pub(crate) fn fact_encoder_mut(&mut self) -> (&mut Tensor, &mut GruParams, &mut GruParams) {
        let table = match self.fact_embed.as_mut() {
            Some(f) => &mut f.table,
            None => &mut self.src_embed,
        };
        (table, &mut self.fact_fwd, &mut self.fact_bwd)
    }

    /// Checks every tensor against the shapes implied by `cfg`.
    pub fn check_shapes(&self, cfg: &ModelConfig) -> Result<()> {
        let expected = ModelParams::zeros(cfg);
        let got = self.named();
        let want = expected.named();
        if got.len() != want.len() {
            return Err(Error::shape("model parameter count", &[want.len()], &[got.len()]));
        }
        for ((gn, gt), (wn, wt)) in got.iter().zip(&want) {
            if gn != wn || gt.shape() != wt.shape() {
                return Err(Error::shape(format!("parameter {wn}"), wt.shape(), gt.shape()));
            }
        }
        Ok(())
    }

    pub fn add_assign(&mut self, other: &ModelParams) -> Result<()> {
        for ((_, a), (_, b)) in self.named_mut().into_iter().zip(other.named()) {
            a.add_assign(b)?;
        }
        Ok(())
    }
}

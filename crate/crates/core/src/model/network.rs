use rand::Rng;

use super::config::{FusionMode, ModelConfig};
use super::decoder::{step_forward, ContextFusion, DecoderStep, Keys};
use super::encoder::{encode_facts, encode_sentence, EncodedFacts, EncodedSource};
use super::params::ModelParams;
use crate::corpus::boundary_indicators;
use crate::error::{Error, Result};
use crate::nn::tensor::matvec_acc;

/// A configured network with its parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    pub config: ModelConfig,
    pub params: ModelParams,
    fusion: ContextFusion,
}

/// Everything the decoder needs about one input, computed once.
#[derive(Clone, Debug, PartialEq)]
pub struct DecodeContext {
    pub sentence: EncodedSource,
    pub facts: EncodedFacts,
    pub initial_state: Vec<f64>,
    pub(crate) keys_x: Keys,
    pub(crate) keys_r: Keys,
}

impl Model {
    pub fn new(config: ModelConfig, params: ModelParams) -> Result<Self> {
        config.validate()?;
        params.check_shapes(&config)?;
        let fusion = match config.fusion {
            FusionMode::Concat => ContextFusion::Concat,
            FusionMode::Gated => ContextFusion::Gated,
        };
        Ok(Model { config, params, fusion })
    }

    pub fn init<R: Rng + ?Sized>(config: ModelConfig, rng: &mut R) -> Result<Self> {
        config.validate()?;
        let params = ModelParams::init(&config, rng);
        Model::new(config, params)
    }

    pub fn fusion(&self) -> ContextFusion {
        self.fusion
    }

    /// Switches a gated model to sentence-only fusion (or back).
    pub fn with_fusion(mut self, fusion: ContextFusion) -> Result<Self> {
        let ok = match self.config.fusion {
            FusionMode::Concat => fusion == ContextFusion::Concat,
            FusionMode::Gated => fusion != ContextFusion::Concat,
        };
        if !ok {
            return Err(Error::Unsupported(format!(
                "{fusion:?} fusion on a {} model",
                self.config.fusion
            )));
        }
        self.fusion = fusion;
        Ok(self)
    }

    pub fn encode_sentence(&self, ids: &[usize]) -> Result<EncodedSource> {
        let p = &self.params;
        encode_sentence(ids, &p.src_embed, &p.sent_fwd, &p.sent_bwd)
    }

    pub fn encode_facts(&self, ids: &[usize]) -> Result<EncodedFacts> {
        let p = &self.params;
        encode_facts(ids, &boundary_indicators(ids), p.fact_table(), &p.fact_fwd, &p.fact_bwd)
    }

    /// `s_0 = tanh(W_0 [forward_n; backward_1] + b_0)` over sentence rows.
    pub fn initial_state(&self, sentence: &EncodedSource) -> Vec<f64> {
        let h = self.config.hidden_dim;
        let n = sentence.states.len();
        let summary = [&sentence.states[n - 1][..h], &sentence.states[0][h..]].concat();
        let mut s = self.params.init_b.data().to_vec();
        matvec_acc(&self.params.init_w, &summary, &mut s);
        s.iter_mut().for_each(|x| *x = x.tanh());
        s
    }

    /// Encodes one input for decoding (dropout off).
    pub fn prepare(&self, source: &[usize], facts: &[usize]) -> Result<DecodeContext> {
        let sentence = self.encode_sentence(source)?;
        let facts = self.encode_facts(facts)?;
        let initial_state = self.initial_state(&sentence);
        let keys_x = Keys::new(&self.params.attn_sent, sentence.states.clone(), sentence.mask.clone());
        let keys_r = Keys::new(&self.params.attn_fact, facts.states.clone(), facts.mask.clone());
        Ok(DecodeContext {
            sentence,
            facts,
            initial_state,
            keys_x,
            keys_r,
        })
    }

    pub fn decode_step(&self, ctx: &DecodeContext, y_prev: usize, s_prev: &[f64]) -> Result<DecoderStep> {
        if y_prev >= self.config.target_vocab {
            return Err(Error::Invalid(format!(
                "previous token {y_prev} outside target vocabulary of size {}",
                self.config.target_vocab
            )));
        }
        if s_prev.len() != self.config.hidden_dim {
            return Err(Error::shape("decoder state", &[self.config.hidden_dim], &[s_prev.len()]));
        }
        Ok(step_forward(&self.params, self.fusion, &ctx.keys_x, &ctx.keys_r, y_prev, s_prev, None).0)
    }
}

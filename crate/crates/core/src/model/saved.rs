use std::path::Path;

use super::config::ModelConfig;
use super::network::Model;
use super::params::ModelParams;
use crate::corpus::Vocab;
use crate::error::{Error, Result};
use crate::nn::{Checkpoint, Precision};

const CONFIG: &str = "config";
const SOURCE_VOCAB: &str = "vocab.source";
const TARGET_VOCAB: &str = "vocab.target";
const PARAM_PREFIX: &str = "param.";

/// A model with the vocabularies it was trained on.
#[derive(Clone, Debug, PartialEq)]
pub struct SavedModel {
    pub model: Model,
    pub source_vocab: Vocab,
    pub target_vocab: Vocab,
}

fn vocab_bytes(v: &Vocab) -> Vec<u8> {
    let mut buf = Vec::new();
    v.write_to(&mut buf).expect("writing to memory");
    buf
}

impl SavedModel {
    pub fn to_checkpoint(&self, precision: Precision) -> Result<Checkpoint> {
        let config = serde_json::to_vec(&self.model.config)
            .map_err(|e| Error::Invalid(format!("serializing config: {e}")))?;
        let mut ck = Checkpoint::new();
        ck.push_bytes(CONFIG, config);
        ck.push_bytes(SOURCE_VOCAB, vocab_bytes(&self.source_vocab));
        ck.push_bytes(TARGET_VOCAB, vocab_bytes(&self.target_vocab));
        ck.push_params(PARAM_PREFIX, &self.model.params, precision);
        Ok(ck)
    }

    pub fn from_checkpoint(ck: &Checkpoint) -> Result<Self> {
        let config: ModelConfig = serde_json::from_slice(ck.bytes(CONFIG)?)
            .map_err(|e| Error::parse("checkpoint config", e.to_string()))?;
        config.validate()?;
        let source_vocab = Vocab::read_from(ck.bytes(SOURCE_VOCAB)?)?;
        let target_vocab = Vocab::read_from(ck.bytes(TARGET_VOCAB)?)?;
        if source_vocab.len() != config.source_vocab || target_vocab.len() != config.target_vocab {
            return Err(Error::Invalid("checkpoint vocabularies disagree with its config".into()));
        }
        let mut params = ModelParams::zeros(&config);
        ck.load_params(PARAM_PREFIX, &mut params)?;
        Ok(SavedModel {
            model: Model::new(config, params)?,
            source_vocab,
            target_vocab,
        })
    }

    pub fn save(&self, path: &Path, precision: Precision) -> Result<()> {
        self.to_checkpoint(precision)?.save(path)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_checkpoint(&Checkpoint::load(path)?)
    }
}

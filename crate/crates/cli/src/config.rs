use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use ftsum::factex::{default_labels, FactConfig};
use ftsum::model::{FusionMode, ModelConfig, TrainConfig};
use ftsum::nn::{ClipMode, Precision};

/// Flat run configuration. Every key has a default; files and `--set`
/// overrides may only name known keys.
#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub embed_dim: usize,
    pub hidden_dim: usize,
    pub fusion: FusionMode,
    pub dropout: f64,
    pub share_embeddings: bool,
    pub lr: f64,
    pub batch_size: usize,
    pub validate_every: usize,
    pub patience: usize,
    /// `value` or `norm`.
    pub clip: String,
    pub clip_lo: f64,
    pub clip_hi: f64,
    pub clip_norm: f64,
    pub max_epochs: usize,
    /// 0 means no cap.
    pub max_steps: usize,
    pub seed: u64,
    pub beam: usize,
    pub max_len: usize,
    pub min_freq: usize,
    pub source_vocab_size: usize,
    pub target_vocab_size: usize,
    pub reporting_filter: bool,
    pub labels: Vec<String>,
    pub stem: bool,
    pub checkpoint_precision: Precision,
    pub top_k: usize,
    pub train_corpus: Option<PathBuf>,
    pub train_facts: Option<PathBuf>,
    pub dev_corpus: Option<PathBuf>,
    pub dev_facts: Option<PathBuf>,
    pub source_vocab: Option<PathBuf>,
    pub target_vocab: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub checkpoint: Option<PathBuf>,
    pub train_log: Option<PathBuf>,
}

impl Default for Config {
    fn default() -> Self {
        let m = ModelConfig::default();
        let t = TrainConfig::default();
        Config {
            embed_dim: m.embed_dim,
            hidden_dim: m.hidden_dim,
            fusion: m.fusion,
            dropout: m.dropout,
            share_embeddings: m.share_embeddings,
            lr: t.lr,
            batch_size: t.batch_size,
            validate_every: t.validate_every,
            patience: t.patience,
            clip: "value".into(),
            clip_lo: -5.0,
            clip_hi: 5.0,
            clip_norm: 5.0,
            max_epochs: t.max_epochs,
            max_steps: 0,
            seed: t.seed,
            beam: 6,
            max_len: 20,
            min_freq: 5,
            source_vocab_size: 120_000,
            target_vocab_size: 69_000,
            reporting_filter: true,
            labels: default_labels(),
            stem: false,
            checkpoint_precision: Precision::F32,
            top_k: 10,
            train_corpus: None,
            train_facts: None,
            dev_corpus: None,
            dev_facts: None,
            source_vocab: None,
            target_vocab: None,
            embeddings: None,
            checkpoint: None,
            train_log: None,
        }
    }
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| anyhow!("bad value {value:?} for {key}: {e}"))
}

fn flag(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => bail!("bad value {value:?} for {key}: expected true or false"),
    }
}

fn path(value: &str) -> Option<PathBuf> {
    (!value.is_empty()).then(|| PathBuf::from(value))
}

impl Config {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "embed_dim" => self.embed_dim = num(key, v)?,
            "hidden_dim" => self.hidden_dim = num(key, v)?,
            "fusion" => self.fusion = v.parse().map_err(|e| anyhow!("{e}"))?,
            "dropout" => self.dropout = num(key, v)?,
            "share_embeddings" => self.share_embeddings = flag(key, v)?,
            "lr" => self.lr = num(key, v)?,
            "batch_size" => self.batch_size = num(key, v)?,
            "validate_every" => self.validate_every = num(key, v)?,
            "patience" => self.patience = num(key, v)?,
            "clip" => {
                if v != "value" && v != "norm" {
                    bail!("bad value {v:?} for clip: expected value or norm");
                }
                self.clip = v.into();
            }
            "clip_lo" => self.clip_lo = num(key, v)?,
            "clip_hi" => self.clip_hi = num(key, v)?,
            "clip_norm" => self.clip_norm = num(key, v)?,
            "max_epochs" => self.max_epochs = num(key, v)?,
            "max_steps" => self.max_steps = num(key, v)?,
            "seed" => self.seed = num(key, v)?,
            "beam" => self.beam = num(key, v)?,
            "max_len" => self.max_len = num(key, v)?,
            "min_freq" => self.min_freq = num(key, v)?,
            "source_vocab_size" => self.source_vocab_size = num(key, v)?,
            "target_vocab_size" => self.target_vocab_size = num(key, v)?,
            "reporting_filter" => self.reporting_filter = flag(key, v)?,
            "labels" => {
                self.labels = v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect()
            }
            "stem" => self.stem = flag(key, v)?,
            "checkpoint_precision" => {
                self.checkpoint_precision = match v {
                    "f32" => Precision::F32,
                    "f64" => Precision::F64,
                    _ => bail!("bad value {v:?} for checkpoint_precision: expected f32 or f64"),
                }
            }
            "top_k" => self.top_k = num(key, v)?,
            "train_corpus" => self.train_corpus = path(v),
            "train_facts" => self.train_facts = path(v),
            "dev_corpus" => self.dev_corpus = path(v),
            "dev_facts" => self.dev_facts = path(v),
            "source_vocab" => self.source_vocab = path(v),
            "target_vocab" => self.target_vocab = path(v),
            "embeddings" => self.embeddings = path(v),
            "checkpoint" => self.checkpoint = path(v),
            "train_log" => self.train_log = path(v),
            other => bail!("unknown config key {other:?}"),
        }
        Ok(())
    }

    /// Applies `key=value` lines; blank lines and `#` comments are skipped.
    pub fn apply_text(&mut self, text: &str, origin: &str) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("{origin}:{}: expected key=value", i + 1))?;
            self.set(k, v).with_context(|| format!("{origin}:{}", i + 1))?;
        }
        Ok(())
    }

    pub fn model_config(&self, source_vocab: usize, target_vocab: usize) -> ModelConfig {
        ModelConfig {
            dropout: self.dropout,
            share_embeddings: self.share_embeddings,
            ..ModelConfig::with_dims(self.embed_dim, self.hidden_dim, source_vocab, target_vocab, self.fusion)
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            lr: self.lr,
            batch_size: self.batch_size,
            validate_every: self.validate_every,
            patience: self.patience,
            clip: if self.clip == "norm" {
                ClipMode::Norm { max_norm: self.clip_norm }
            } else {
                ClipMode::Value { lo: self.clip_lo, hi: self.clip_hi }
            },
            max_epochs: self.max_epochs,
            max_steps: (self.max_steps > 0).then_some(self.max_steps),
            seed: self.seed,
        }
    }

    pub fn fact_config(&self) -> FactConfig {
        FactConfig {
            labels: self.labels.clone(),
            reporting_filter: self.reporting_filter,
            ..FactConfig::default()
        }
    }
}

/// Defaults, then the optional file, then `key=value` overrides in order.
pub fn parse_config<S: AsRef<str>>(file: Option<&Path>, overrides: &[S]) -> Result<Config> {
    let mut cfg = Config::default();
    if let Some(p) = file {
        let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        cfg.apply_text(&text, &p.display().to_string())?;
    }
    for o in overrides {
        let o = o.as_ref();
        let (k, v) = o.split_once('=').ok_or_else(|| anyhow!("override {o:?} is not key=value"))?;
        cfg.set(k, v)?;
    }
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = Config::default();
        assert_eq!((c.embed_dim, c.hidden_dim, c.batch_size, c.beam, c.max_len), (200, 400, 32, 6, 20));
        assert_eq!((c.lr, c.dropout, c.clip_lo, c.clip_hi), (0.001, 0.5, -5.0, 5.0));
        assert_eq!((c.validate_every, c.patience, c.min_freq), (2000, 10, 5));
        assert_eq!(c.checkpoint_precision, Precision::F32);
    }

    #[test]
    fn text_overrides_and_typos() {
        let mut c = Config::default();
        c.apply_text("# tiny\nhidden_dim = 8\n\nfusion=concat\n", "t").unwrap();
        assert_eq!(c.hidden_dim, 8);
        assert_eq!(c.fusion, FusionMode::Concat);
        let err = c.apply_text("hiden_dim=8", "t").unwrap_err();
        assert!(format!("{err:#}").contains("hiden_dim"));
        assert!(c.apply_text("hidden_dim=eight", "t").is_err());
        assert!(c.apply_text("hidden_dim", "t").is_err());
    }

    #[test]
    fn max_steps_zero_is_uncapped() {
        let mut c = Config::default();
        assert_eq!(c.train_config().max_steps, None);
        c.set("max_steps", "7").unwrap();
        assert_eq!(c.train_config().max_steps, Some(7));
        c.set("clip", "norm").unwrap();
        assert_eq!(c.train_config().clip, ClipMode::Norm { max_norm: 5.0 });
    }
}

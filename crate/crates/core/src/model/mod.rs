//! The dual-encoder summarizer: BiGRU sentence and fact encoders, a GRU
//! decoder attending to both, concatenated or gated context fusion, the
//! per-token NLL objective with hand-written backprop, and training.

pub mod check;
pub mod config;
pub mod decoder;
pub mod encoder;
pub mod loss;
pub mod network;
pub mod params;
pub mod saved;
pub mod schedule;
pub mod train;

pub use check::{tiny_gradcheck, CHECK_EPSILON};
pub use config::{FusionMode, ModelConfig, TrainConfig};
pub use decoder::{combine_contexts, ContextFusion, DecoderStep};
pub use encoder::{encode_facts, encode_sentence, EncodedFacts, EncodedSource};
pub use loss::{batch_loss, batch_loss_and_grad, evaluate, pair_loss, EvalTotals, LossObjective, PairLoss};
pub use network::{DecodeContext, Model};
pub use params::{GateParams, ModelParams};
pub use saved::SavedModel;
pub use schedule::LrSchedule;
pub use train::{train, TrainLogRecord, TrainOutcome};

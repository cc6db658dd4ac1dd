//! Numeric kernel: tensors, GRU cell, additive attention, masked softmax,
//! dropout, Adam, clipping, a finite-difference gradient oracle and the
//! checkpoint container.

pub mod attention;
pub mod checkpoint;
pub mod dropout;
pub mod gradcheck;
pub mod gru;
pub mod init;
pub mod optim;
pub mod params;
pub mod softmax;
pub mod tensor;

pub use attention::{attention_score, AttentionParams};
pub use checkpoint::{Checkpoint, Precision};
pub use dropout::dropout_mask;
pub use gradcheck::{finite_diff_check, finite_diff_compare, GradCheckReport, GradComparison, Objective};
pub use gru::{gru_cell, GruParams};
pub use optim::{adam_step, clip_gradients, AdamConfig, AdamState, ClipMode};
pub use params::NamedTensors;
pub use softmax::masked_softmax;
pub use tensor::Tensor;

/// The seeded pseudo-random source threaded through every stochastic step.
pub type SeededRng = rand_chacha::ChaCha8Rng;

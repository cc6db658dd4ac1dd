//! Beam-search and greedy decoding.
//!
//! Both searches run over any [`StepModel`], so small hand-set models can
//! be checked against exhaustive enumeration.

pub mod search;
pub mod step;

pub use search::{beam_search, beam_search_with, greedy_decode, greedy_with, DecodeOptions, Hypothesis};
pub use step::{ModelStepper, StepModel};

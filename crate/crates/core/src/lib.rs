//! Fact-aware abstractive sentence summarization.
//!
//! The crate covers fact-description extraction from relation triples and
//! dependency parses ([`factex`]), corpus preparation ([`corpus`]), the
//! dual-attention GRU encoder-decoder and its training loop ([`model`]),
//! beam-search decoding ([`infer`]) and evaluation ([`eval`]).

pub mod corpus;
pub mod error;
pub mod eval;
pub mod factex;
pub mod infer;
pub mod model;
pub mod nn;

pub use error::{Error, Result};

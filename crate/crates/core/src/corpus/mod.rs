//! Text normalization, vocabularies, batching, pretrained embeddings and
//! corpus statistics.

pub mod batch;
pub mod embeddings;
pub mod io;
pub mod stats;
pub mod text;
pub mod vocab;

pub use batch::{batch_encoded, boundary_indicators, make_batches, Batch, EncodedPair, ParallelPair};
pub use embeddings::{load_pretrained_embeddings, EmbeddingCoverage};
pub use io::{read_parallel_corpus, read_sentences};
pub use stats::{corpus_stats, CorpusStats};
pub use text::{normalize_line, normalize_text};
pub use vocab::{build_vocab, encode_sequence, Vocab};

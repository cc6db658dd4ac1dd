//! Fact-description extraction from open-IE relation triples and dependency
//! parses.
//!
//! Triples whose words are covered by another triple are dropped and the
//! rest are rendered as `subject predicate object`. Dependency arcs with
//! predicate-argument and modifier labels are merged into connected
//! components, each read off in sentence order. Both sources are combined
//! and joined with the `|||` separator.

pub mod assemble;
pub mod deps;
pub mod io;
pub mod triples;
pub mod types;

pub use assemble::{assemble_fact_sequence, extract_facts, filter_reporting, FactConfig};
pub use deps::{default_labels, extract_dep_tuples, merge_tuples, DEFAULT_LABELS};
pub use io::{read_conllu, read_triples, write_facts};
pub use triples::{dedup_triples, triple_to_fact};
pub use types::{DepNode, DepTree, DepTuple, FactDesc, FactSeq, Token, Triple};

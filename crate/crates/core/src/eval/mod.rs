//! ROUGE-1/2/L, perplexity, context-gate statistics and faithfulness
//! annotation tallies.

pub mod analysis;
pub mod faith;
pub mod rouge;

pub use analysis::{gate_report, gate_trajectory, perplexity, GateReport, PairGate};
pub use faith::{faithfulness_tally, read_faithfulness, FaithLabel, FaithTally, LabelCounts};
pub use rouge::{lcs_len, rouge_l, rouge_n, score_corpus, stem_tokens, RougeReport, RougeScore};

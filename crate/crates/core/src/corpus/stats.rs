use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::batch::ParallelPair;
use super::vocab::SEP_TOKEN;
use crate::error::{Error, Result};

/// Length, fact-count and copy-ratio statistics of a parallel corpus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub pairs: usize,
    pub avg_source_len: f64,
    pub avg_target_len: f64,
    /// Fact tokens per pair, separators excluded.
    pub avg_fact_len: f64,
    pub avg_fact_count: f64,
    pub copy_ratio_source: f64,
    /// Averaged over pairs that have at least one fact token.
    pub copy_ratio_fact: f64,
}

/// Number of separator-delimited descriptions in a fact sequence.
pub fn fact_count<S: AsRef<str>>(facts: &[S]) -> usize {
    facts
        .split(|t| t.as_ref() == SEP_TOKEN)
        .filter(|group| !group.is_empty())
        .count()
}

/// Fraction of `tokens` whose type occurs in `summary`, or `None` when
/// `tokens` is empty.
pub fn copy_ratio<S: AsRef<str>>(tokens: &[S], summary: &HashSet<&str>) -> Option<f64> {
    if tokens.is_empty() {
        return None;
    }
    let hits = tokens.iter().filter(|t| summary.contains(t.as_ref())).count();
    Some(hits as f64 / tokens.len() as f64)
}

pub fn corpus_stats(pairs: &[ParallelPair]) -> Result<CorpusStats> {
    if pairs.is_empty() {
        return Err(Error::Empty("corpus_stats needs at least one pair".into()));
    }
    let n = pairs.len() as f64;
    let mut source_len = 0usize;
    let mut target_len = 0usize;
    let mut fact_len = 0usize;
    let mut facts = 0usize;
    let mut copy_source = 0.0;
    let mut copy_fact = 0.0;
    let mut with_facts = 0usize;
    for p in pairs {
        let summary: HashSet<&str> = p.target.iter().map(String::as_str).collect();
        let fact_tokens: Vec<&str> = p
            .facts
            .iter()
            .map(String::as_str)
            .filter(|t| *t != SEP_TOKEN)
            .collect();
        source_len += p.source.len();
        target_len += p.target.len();
        fact_len += fact_tokens.len();
        facts += fact_count(&p.facts);
        copy_source += copy_ratio(&p.source, &summary).unwrap_or(0.0);
        if let Some(r) = copy_ratio(&fact_tokens, &summary) {
            copy_fact += r;
            with_facts += 1;
        }
    }
    Ok(CorpusStats {
        pairs: pairs.len(),
        avg_source_len: source_len as f64 / n,
        avg_target_len: target_len as f64 / n,
        avg_fact_len: fact_len as f64 / n,
        avg_fact_count: facts as f64 / n,
        copy_ratio_source: copy_source / n,
        copy_ratio_fact: if with_facts == 0 {
            0.0
        } else {
            copy_fact / with_facts as f64
        },
    })
}

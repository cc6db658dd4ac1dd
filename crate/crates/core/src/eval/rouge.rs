use std::collections::HashMap;

use rust_stemmers::{Algorithm, Stemmer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RougeScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl RougeScore {
    /// Scores `overlap` matched units out of `candidate` and `reference`
    /// totals. An empty side gives 0 for its ratio.
    pub fn from_counts(overlap: usize, candidate: usize, reference: usize) -> Self {
        let ratio = |n: usize, d: usize| if d == 0 { 0.0 } else { n as f64 / d as f64 };
        let precision = ratio(overlap, candidate);
        let recall = ratio(overlap, reference);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        RougeScore { precision, recall, f1 }
    }
}

fn ngram_counts<S: AsRef<str>>(tokens: &[S], n: usize) -> HashMap<Vec<&str>, usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *counts.entry(w.iter().map(|t| t.as_ref()).collect()).or_insert(0) += 1;
        }
    }
    counts
}

/// Clipped n-gram overlap.
pub fn rouge_n<S: AsRef<str>>(candidate: &[S], reference: &[S], n: usize) -> Result<RougeScore> {
    if n == 0 {
        return Err(Error::Invalid("ROUGE-N needs n >= 1".into()));
    }
    let cand = ngram_counts(candidate, n);
    let refs = ngram_counts(reference, n);
    let overlap = cand
        .iter()
        .map(|(g, c)| refs.get(g).map_or(0, |r| (*c).min(*r)))
        .sum();
    let total = |m: &HashMap<Vec<&str>, usize>| m.values().sum();
    Ok(RougeScore::from_counts(overlap, total(&cand), total(&refs)))
}

pub fn lcs_len<S: AsRef<str>>(a: &[S], b: &[S]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x.as_ref() == y.as_ref() {
                prev[j] + 1
            } else {
                cur[j].max(prev[j + 1])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Longest-common-subsequence precision, recall and F1 (unweighted).
pub fn rouge_l<S: AsRef<str>>(candidate: &[S], reference: &[S]) -> RougeScore {
    RougeScore::from_counts(lcs_len(candidate, reference), candidate.len(), reference.len())
}

/// Porter-style (Snowball English) stems of `tokens`.
pub fn stem_tokens<S: AsRef<str>>(tokens: &[S]) -> Vec<String> {
    let stemmer = Stemmer::create(Algorithm::English);
    tokens.iter().map(|t| stemmer.stem(t.as_ref()).into_owned()).collect()
}

/// Per-metric averages over a corpus.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RougeReport {
    pub pairs: usize,
    pub rouge_1: RougeScore,
    pub rouge_2: RougeScore,
    pub rouge_l: RougeScore,
}

fn accumulate(sum: &mut RougeScore, s: RougeScore) {
    sum.precision += s.precision;
    sum.recall += s.recall;
    sum.f1 += s.f1;
}

fn average(sum: RougeScore, n: usize) -> RougeScore {
    let n = n as f64;
    RougeScore {
        precision: sum.precision / n,
        recall: sum.recall / n,
        f1: sum.f1 / n,
    }
}

/// Averages ROUGE-1, ROUGE-2 and ROUGE-L over aligned candidate/reference
/// pairs, optionally on stemmed tokens.
pub fn score_corpus<S: AsRef<str>>(candidates: &[Vec<S>], references: &[Vec<S>], stem: bool) -> Result<RougeReport> {
    if candidates.len() != references.len() {
        return Err(Error::shape("reference count", &[candidates.len()], &[references.len()]));
    }
    if candidates.is_empty() {
        return Err(Error::Empty("candidate set".into()));
    }
    let mut r = RougeReport {
        pairs: candidates.len(),
        ..Default::default()
    };
    for (c, rf) in candidates.iter().zip(references) {
        let (c, rf): (Vec<String>, Vec<String>) = if stem {
            (stem_tokens(c), stem_tokens(rf))
        } else {
            (
                c.iter().map(|t| t.as_ref().to_string()).collect(),
                rf.iter().map(|t| t.as_ref().to_string()).collect(),
            )
        };
        accumulate(&mut r.rouge_1, rouge_n(&c, &rf, 1)?);
        accumulate(&mut r.rouge_2, rouge_n(&c, &rf, 2)?);
        accumulate(&mut r.rouge_l, rouge_l(&c, &rf));
    }
    r.rouge_1 = average(r.rouge_1, r.pairs);
    r.rouge_2 = average(r.rouge_2, r.pairs);
    r.rouge_l = average(r.rouge_l, r.pairs);
    Ok(r)
}

use std::io::BufRead;
use std::path::Path;

use super::batch::ParallelPair;
use super::text::normalize_line;
use crate::error::{Error, Result};

pub(crate) fn read_lines(path: &Path) -> Result<Vec<String>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    std::io::BufReader::new(file)
        .lines()
        .collect::<std::io::Result<Vec<_>>>()
        .map_err(|e| Error::io(path, e))
}

/// Parses `source<TAB>target` lines, with an optional aligned fact line per
/// pair (descriptions joined by ` ||| `, empty when none). Every field is
/// normalized.
pub fn parse_parallel(corpus: &[String], facts: Option<&[String]>) -> Result<Vec<ParallelPair>> {
    if let Some(f) = facts {
        if f.len() != corpus.len() {
            return Err(Error::Invalid(format!(
                "fact file has {} lines but the corpus has {}",
                f.len(),
                corpus.len()
            )));
        }
    }
    corpus
        .iter()
        .enumerate()
        .map(|(i, line)| {
            let (source, target) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(format!("corpus line {}", i + 1), "expected source<TAB>target"))?;
            Ok(ParallelPair {
                source: normalize_line(source),
                facts: facts.map(|f| normalize_line(&f[i])).unwrap_or_default(),
                target: normalize_line(target),
            })
        })
        .collect()
}

pub fn read_parallel_corpus(corpus: &Path, facts: Option<&Path>) -> Result<Vec<ParallelPair>> {
    let lines = read_lines(corpus)?;
    let fact_lines = facts.map(read_lines).transpose()?;
    parse_parallel(&lines, fact_lines.as_deref())
}

/// Reads one whitespace-tokenized, normalized sentence per line.
pub fn read_sentences(path: &Path) -> Result<Vec<Vec<String>>> {
    Ok(read_lines(path)?.iter().map(|l| normalize_line(l)).collect())
}

use std::collections::HashSet;
use std::io::BufRead;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::vocab::{Vocab, SPECIALS};
use crate::error::{Error, Result};
use crate::nn::init::glorot_uniform;
use crate::nn::Tensor;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingCoverage {
    pub covered: usize,
    pub regular: usize,
    /// `covered / regular`, 0 when the vocabulary has no regular tokens.
    pub fraction: f64,
}

/// Builds a `|vocab| × dim` embedding matrix: rows start from the model's
/// Glorot-uniform initialization and rows of tokens present in the
/// pretrained text file (`token v_1 .. v_dim` per line) are overwritten.
pub fn load_pretrained_embeddings<R: Rng + ?Sized>(
    path: &Path,
    vocab: &Vocab,
    dim: usize,
    rng: &mut R,
) -> Result<(Tensor, EmbeddingCoverage)> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_pretrained_embeddings(std::io::BufReader::new(file), vocab, dim, rng)
}

pub fn read_pretrained_embeddings<B: BufRead, R: Rng + ?Sized>(
    reader: B,
    vocab: &Vocab,
    dim: usize,
    rng: &mut R,
) -> Result<(Tensor, EmbeddingCoverage)> {
    let mut table = glorot_uniform(vocab.len(), dim, rng);
    let mut seen = HashSet::new();
    for (lineno, line) in reader.lines().enumerate() {
        let loc = || format!("embeddings line {}", lineno + 1);
        let line = line.map_err(|e| Error::parse(loc(), e.to_string()))?;
        let mut fields = line.split_whitespace();
        let Some(token) = fields.next() else { continue };
        let values = fields
            .map(|f| f.parse::<f64>().map_err(|e| Error::parse(loc(), format!("{f:?}: {e}"))))
            .collect::<Result<Vec<f64>>>()?;
        if values.len() != dim {
            return Err(Error::shape(loc(), &[dim], &[values.len()]));
        }
        if let Some(id) = vocab.id(token) {
            if id >= SPECIALS.len() && seen.insert(id) {
                table.row_mut(id).copy_from_slice(&values);
            }
        }
    }
    let regular = vocab.len() - SPECIALS.len();
    let coverage = EmbeddingCoverage {
        covered: seen.len(),
        regular,
        fraction: if regular == 0 {
            0.0
        } else {
            seen.len() as f64 / regular as f64
        },
    };
    Ok((table, coverage))
}

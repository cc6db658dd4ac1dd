use rand::seq::SliceRandom;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use super::vocab::{encode_sequence, Vocab, BOS, EOS, PAD, SEP};
use crate::error::{Error, Result};
use crate::nn::SeededRng;

/// One aligned training example: source sentence, fact sequence (with
/// separator tokens between descriptions) and reference summary.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParallelPair {
    pub source: Vec<String>,
    pub facts: Vec<String>,
    pub target: Vec<String>,
}

/// Id-encoded example. `target` is wrapped as `BOS y_1 .. y_l EOS`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodedPair {
    pub source: Vec<usize>,
    pub facts: Vec<usize>,
    pub target: Vec<usize>,
}

impl EncodedPair {
    pub fn encode(pair: &ParallelPair, source_vocab: &Vocab, target_vocab: &Vocab) -> Result<Self> {
        if pair.source.is_empty() {
            return Err(Error::Invalid("pair has an empty source".into()));
        }
        if pair.target.is_empty() {
            return Err(Error::Invalid("pair has an empty target".into()));
        }
        let mut target = Vec::with_capacity(pair.target.len() + 2);
        target.push(BOS);
        target.extend(encode_sequence(&pair.target, target_vocab));
        target.push(EOS);
        Ok(EncodedPair {
            source: encode_sequence(&pair.source, source_vocab),
            facts: encode_sequence(&pair.facts, source_vocab),
            target,
        })
    }

    pub fn gamma(&self) -> Vec<u8> {
        boundary_indicators(&self.facts)
    }

    /// Number of predicted target positions (every token after BOS).
    pub fn target_tokens(&self) -> usize {
        self.target.len() - 1
    }
}

/// 0 at separator positions, 1 elsewhere.
pub fn boundary_indicators(fact_ids: &[usize]) -> Vec<u8> {
    fact_ids.iter().map(|id| u8::from(*id != SEP)).collect()
}

/// A padded mini-batch. Masks are 0 exactly at PAD positions; `gamma` is 0
/// exactly at separator positions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Batch {
    pub source_ids: Vec<Vec<usize>>,
    pub fact_ids: Vec<Vec<usize>>,
    pub target_ids: Vec<Vec<usize>>,
    pub source_mask: Vec<Vec<u8>>,
    pub fact_mask: Vec<Vec<u8>>,
    pub target_mask: Vec<Vec<u8>>,
    pub gamma: Vec<Vec<u8>>,
    /// Position of each row in the originating corpus.
    pub indices: Vec<usize>,
}

impl Batch {
    pub fn from_pairs(pairs: &[EncodedPair], indices: Vec<usize>) -> Self {
        let (source_ids, source_mask) = pad(pairs.iter().map(|p| &p.source[..]));
        let (fact_ids, fact_mask) = pad(pairs.iter().map(|p| &p.facts[..]));
        let (target_ids, target_mask) = pad(pairs.iter().map(|p| &p.target[..]));
        let gamma = fact_ids
            .iter()
            .map(|row| row.iter().map(|id| u8::from(*id != SEP)).collect())
            .collect();
        Batch {
            source_ids,
            fact_ids,
            target_ids,
            source_mask,
            fact_mask,
            target_mask,
            gamma,
            indices,
        }
    }

    pub fn len(&self) -> usize {
        self.source_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.source_ids.is_empty()
    }

    /// Row `i` with padding stripped.
    pub fn pair(&self, i: usize) -> EncodedPair {
        let strip = |ids: &[usize], mask: &[u8]| -> Vec<usize> {
            ids.iter().zip(mask).filter(|(_, m)| **m != 0).map(|(id, _)| *id).collect()
        };
        EncodedPair {
            source: strip(&self.source_ids[i], &self.source_mask[i]),
            facts: strip(&self.fact_ids[i], &self.fact_mask[i]),
            target: strip(&self.target_ids[i], &self.target_mask[i]),
        }
    }

    pub fn pairs(&self) -> impl Iterator<Item = EncodedPair> + '_ {
        (0..self.len()).map(move |i| self.pair(i))
    }
}

fn pad<'a>(rows: impl Iterator<Item = &'a [usize]>) -> (Vec<Vec<usize>>, Vec<Vec<u8>>) {
    let rows: Vec<&[usize]> = rows.collect();
    let width = rows.iter().map(|r| r.len()).max().unwrap_or(0);
    let mut ids = Vec::with_capacity(rows.len());
    let mut mask = Vec::with_capacity(rows.len());
    for r in rows {
        let mut row = r.to_vec();
        row.resize(width, PAD);
        let mut m = vec![1u8; r.len()];
        m.resize(width, 0);
        ids.push(row);
        mask.push(m);
    }
    (ids, mask)
}

/// Encodes `pairs` and groups them into batches of `batch_size` (the last
/// batch may be smaller). With a seed the order is a seeded shuffle,
/// otherwise corpus order.
pub fn make_batches(
    pairs: &[ParallelPair],
    source_vocab: &Vocab,
    target_vocab: &Vocab,
    batch_size: usize,
    seed: Option<u64>,
) -> Result<Vec<Batch>> {
    let encoded = pairs
        .iter()
        .enumerate()
        .map(|(i, p)| {
            EncodedPair::encode(p, source_vocab, target_vocab)
                .map_err(|e| Error::Invalid(format!("pair {i}: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    batch_encoded(&encoded, batch_size, seed)
}

pub fn batch_encoded(encoded: &[EncodedPair], batch_size: usize, seed: Option<u64>) -> Result<Vec<Batch>> {
    if batch_size == 0 {
        return Err(Error::Invalid("batch_size must be at least 1".into()));
    }
    let mut order: Vec<usize> = (0..encoded.len()).collect();
    if let Some(seed) = seed {
        order.shuffle(&mut SeededRng::seed_from_u64(seed));
    }
    Ok(order
        .chunks(batch_size)
        .map(|chunk| {
            let rows: Vec<EncodedPair> = chunk.iter().map(|i| encoded[*i].clone()).collect();
            Batch::from_pairs(&rows, chunk.to_vec())
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::vocab::Vocab;
    use proptest::prelude::*;

    fn pair(src: &str, facts: &str, tgt: &str) -> ParallelPair {
        let split = |s: &str| s.split_whitespace().map(String::from).collect();
        ParallelPair {
            source: split(src),
            facts: split(facts),
            target: split(tgt),
        }
    }

    fn vocab() -> Vocab {
        Vocab::from_tokens(["a", "b", "c", "d"])
    }

    #[test]
    fn exact_division() {
        let pairs: Vec<_> = (0..64).map(|_| pair("a b", "a", "b")).collect();
        let batches = make_batches(&pairs, &vocab(), &vocab(), 32, Some(1)).unwrap();
        assert_eq!(batches.len(), 2);
        assert!(batches.iter().all(|b| b.len() == 32));
    }

    #[test]
    fn gamma_zero_at_separator() {
        let b = make_batches(&[pair("a", "a b ||| c", "a")], &vocab(), &vocab(), 1, None).unwrap();
        assert_eq!(b[0].gamma[0], vec![1, 1, 0, 1]);
    }

    #[test]
    fn targets_are_wrapped() {
        let v = vocab();
        let b = make_batches(&[pair("a", "", "c d")], &v, &v, 1, None).unwrap();
        assert_eq!(b[0].target_ids[0], vec![BOS, v.id("c").unwrap(), v.id("d").unwrap(), EOS]);
        assert!(b[0].fact_ids[0].is_empty());
    }

    #[test]
    fn seeded_order_is_deterministic() {
        let pairs: Vec<_> = ["a", "b", "c", "d", "a b", "b c", "c d"]
            .iter()
            .map(|s| pair(s, s, s))
            .collect();
        let one = make_batches(&pairs, &vocab(), &vocab(), 3, Some(9)).unwrap();
        let two = make_batches(&pairs, &vocab(), &vocab(), 3, Some(9)).unwrap();
        assert_eq!(one, two);
        let ordered = make_batches(&pairs, &vocab(), &vocab(), 3, None).unwrap();
        assert_eq!(ordered[0].indices, vec![0, 1, 2]);
        assert_eq!(ordered[2].indices, vec![6]);
    }

    #[test]
    fn malformed_pairs_are_rejected() {
        assert!(make_batches(&[pair("a", "", "")], &vocab(), &vocab(), 1, None).is_err());
        assert!(make_batches(&[pair("", "", "a")], &vocab(), &vocab(), 1, None).is_err());
        assert!(make_batches(&[pair("a", "", "a")], &vocab(), &vocab(), 0, None).is_err());
    }

    fn arb_pair() -> impl Strategy<Value = ParallelPair> {
        let tok = prop::sample::select(vec!["a", "b", "c", "d", "zz", "|||"]);
        (
            prop::collection::vec(tok.clone(), 1..6),
            prop::collection::vec(tok.clone(), 0..8),
            prop::collection::vec(tok, 1..5),
        )
            .prop_map(|(s, f, t)| ParallelPair {
                source: s.into_iter().filter(|x| *x != "|||").map(String::from).chain(["a".to_string()]).collect(),
                facts: f.into_iter().map(String::from).collect(),
                target: t.into_iter().map(String::from).collect(),
            })
    }

    proptest! {
        #[test]
        fn masks_and_gamma_track_pad_and_sep(
            pairs in prop::collection::vec(arb_pair(), 1..10),
            bs in 1usize..5,
            seed in any::<u64>(),
        ) {
            let v = vocab();
            for b in make_batches(&pairs, &v, &v, bs, Some(seed)).unwrap() {
                for (ids, mask) in b.source_ids.iter().chain(&b.fact_ids).chain(&b.target_ids)
                    .zip(b.source_mask.iter().chain(&b.fact_mask).chain(&b.target_mask))
                {
                    for (id, m) in ids.iter().zip(mask) {
                        prop_assert_eq!(*m == 0, *id == PAD);
                    }
                }
                for (ids, g) in b.fact_ids.iter().zip(&b.gamma) {
                    prop_assert_eq!(ids.len(), g.len());
                    for (id, gi) in ids.iter().zip(g) {
                        prop_assert_eq!(*gi == 0, *id == SEP);
                    }
                }
                let w = b.source_ids[0].len();
                prop_assert!(b.source_ids.iter().all(|r| r.len() == w));
                for (k, i) in b.indices.iter().enumerate() {
                    let expected = EncodedPair::encode(&pairs[*i], &v, &v).unwrap();
                    prop_assert_eq!(b.pair(k), expected);
                }
            }
        }
    }
}

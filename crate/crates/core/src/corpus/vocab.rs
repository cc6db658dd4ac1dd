use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};

pub const PAD_TOKEN: &str = "<pad>";
pub const UNK_TOKEN: &str = "<unk>";
pub const BOS_TOKEN: &str = "<s>";
pub const EOS_TOKEN: &str = "</s>";
/// Separator placed between fact descriptions.
pub const SEP_TOKEN: &str = "|||";

pub const PAD: usize = 0;
pub const UNK: usize = 1;
pub const BOS: usize = 2;
pub const EOS: usize = 3;
pub const SEP: usize = 4;

pub const SPECIALS: [&str; 5] = [PAD_TOKEN, UNK_TOKEN, BOS_TOKEN, EOS_TOKEN, SEP_TOKEN];

/// Bidirectional token/id map. Specials occupy ids `0..5`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocab {
    token_to_id: HashMap<String, usize>,
    id_to_token: Vec<String>,
}

impl Default for Vocab {
    fn default() -> Self {
        Self::specials_only()
    }
}

impl Vocab {
    pub fn specials_only() -> Self {
        let id_to_token: Vec<String> = SPECIALS.iter().map(|s| s.to_string()).collect();
        let token_to_id = id_to_token
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Vocab {
            token_to_id,
            id_to_token,
        }
    }

    /// Specials followed by `tokens` in order; duplicates and special strings
    /// are skipped.
    pub fn from_tokens<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut v = Self::specials_only();
        for t in tokens {
            v.push(t.into());
        }
        v
    }

    fn push(&mut self, token: String) {
        if !self.token_to_id.contains_key(&token) {
            self.token_to_id.insert(token.clone(), self.id_to_token.len());
            self.id_to_token.push(token);
        }
    }

    pub fn len(&self) -> usize {
        self.id_to_token.len()
    }

    pub fn is_empty(&self) -> bool {
        self.id_to_token.is_empty()
    }

    pub fn id(&self, token: &str) -> Option<usize> {
        self.token_to_id.get(token).copied()
    }

    pub fn token(&self, id: usize) -> Option<&str> {
        self.id_to_token.get(id).map(String::as_str)
    }

    pub fn contains(&self, token: &str) -> bool {
        self.token_to_id.contains_key(token)
    }

    pub fn is_special(id: usize) -> bool {
        id < SPECIALS.len()
    }

    /// Non-special tokens in id order.
    pub fn regular_tokens(&self) -> &[String] {
        &self.id_to_token[SPECIALS.len()..]
    }

    pub fn encode<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<usize> {
        encode_sequence(tokens, self)
    }

    pub fn decode(&self, ids: &[usize]) -> Vec<String> {
        ids.iter()
            .map(|id| self.token(*id).unwrap_or(UNK_TOKEN).to_string())
            .collect()
    }

    /// One regular token per line; line `k` is id `k + 5`.
    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for t in self.regular_tokens() {
            writeln!(w, "{t}")?;
        }
        w.flush()
    }

    pub fn read_from<R: BufRead>(r: R) -> Result<Self> {
        let mut v = Self::specials_only();
        for (i, line) in r.lines().enumerate() {
            let line = line.map_err(|e| Error::parse(format!("vocab line {}", i + 1), e.to_string()))?;
            let token = line.trim_end_matches(['\r', '\n']);
            if token.is_empty() || token.contains(char::is_whitespace) {
                return Err(Error::parse(
                    format!("vocab line {}", i + 1),
                    format!("invalid token {token:?}"),
                ));
            }
            if v.contains(token) {
                return Err(Error::parse(
                    format!("vocab line {}", i + 1),
                    format!("duplicate token {token:?}"),
                ));
            }
            v.push(token.to_string());
        }
        Ok(v)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_to(std::io::BufWriter::new(f))
            .map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_from(std::io::BufReader::new(f))
    }
}

/// Keeps tokens with frequency `>= min_freq`, most frequent first with
/// lexicographic tie-breaking, truncated so the vocabulary including
/// specials holds at most `max_size` entries.
pub fn build_vocab<I, S>(corpus: I, min_freq: usize, max_size: usize) -> Result<Vocab>
where
    I: IntoIterator,
    I::Item: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    if min_freq == 0 {
        return Err(Error::Invalid("min_freq must be at least 1".into()));
    }
    let mut counts: HashMap<String, usize> = HashMap::new();
    for seq in corpus {
        for tok in seq {
            let tok = tok.as_ref();
            if SPECIALS.contains(&tok) {
                continue;
            }
            *counts.entry(tok.to_string()).or_default() += 1;
        }
    }
    let mut kept: Vec<(String, usize)> = counts.into_iter().filter(|(_, c)| *c >= min_freq).collect();
    kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    kept.truncate(max_size.saturating_sub(SPECIALS.len()));
    Ok(Vocab::from_tokens(kept.into_iter().map(|(t, _)| t)))
}

/// Maps tokens to ids, sending out-of-vocabulary tokens to UNK.
pub fn encode_sequence<S: AsRef<str>>(tokens: &[S], vocab: &Vocab) -> Vec<usize> {
    tokens
        .iter()
        .map(|t| vocab.id(t.as_ref()).unwrap_or(UNK))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn stream(freqs: &[(&str, usize)]) -> Vec<Vec<String>> {
        freqs
            .iter()
            .map(|(t, n)| vec![t.to_string(); *n])
            .collect()
    }

    #[test]
    fn threshold_keeps_frequent_tokens() {
        let v = build_vocab(stream(&[("a", 6), ("b", 5), ("c", 4)]), 5, usize::MAX).unwrap();
        assert_eq!(v.len(), SPECIALS.len() + 2);
        assert!(v.contains("a") && v.contains("b") && !v.contains("c"));
        assert_eq!(v.id("a"), Some(5));
        assert_eq!(v.id("b"), Some(6));
    }

    #[test]
    fn empty_corpus_gives_specials_only() {
        let v = build_vocab(Vec::<Vec<String>>::new(), 1, 100).unwrap();
        assert_eq!(v, Vocab::specials_only());
        for (i, s) in SPECIALS.iter().enumerate() {
            assert_eq!(v.id(s), Some(i));
        }
    }

    #[test]
    fn truncation_breaks_ties_lexicographically() {
        let v = build_vocab(stream(&[("d", 3), ("b", 2), ("a", 2), ("c", 2)]), 1, 7).unwrap();
        assert_eq!(v.regular_tokens(), &["d".to_string(), "a".to_string()]);
        let tiny = build_vocab(stream(&[("a", 9)]), 1, 2).unwrap();
        assert_eq!(tiny.len(), SPECIALS.len());
    }

    #[test]
    fn special_strings_are_not_counted() {
        let v = build_vocab(vec![vec!["|||", "|||", "x"]], 1, 100).unwrap();
        assert_eq!(v.id("|||"), Some(SEP));
        assert_eq!(v.len(), SPECIALS.len() + 1);
    }

    #[test]
    fn zero_min_freq_is_rejected() {
        assert!(build_vocab(vec![vec!["a"]], 0, 10).is_err());
    }

    #[test]
    fn oov_maps_to_unk() {
        let v = Vocab::from_tokens(["a"]);
        assert_eq!(encode_sequence(&["a", "zzz"], &v), vec![v.id("a").unwrap(), UNK]);
        assert!(encode_sequence::<&str>(&[], &v).is_empty());
    }

    #[test]
    fn file_round_trip() {
        let v = Vocab::from_tokens(["the", "cat", "#,###"]);
        let mut buf = Vec::new();
        v.write_to(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "the\ncat\n#,###\n");
        assert_eq!(Vocab::read_from(&buf[..]).unwrap(), v);
        assert!(Vocab::read_from(&b"a\na\n"[..]).is_err());
    }

    proptest! {
        #[test]
        fn round_trip_on_in_vocab_input(
            words in prop::collection::vec("[a-z]{1,4}", 1..20),
            picks in prop::collection::vec(any::<prop::sample::Index>(), 0..20),
        ) {
            let v = Vocab::from_tokens(words.clone());
            let seq: Vec<String> = picks.iter().map(|i| words[i.index(words.len())].clone()).collect();
            let ids = encode_sequence(&seq, &v);
            prop_assert!(ids.iter().all(|id| *id >= SPECIALS.len()));
            prop_assert_eq!(v.decode(&ids), seq);
        }
    }
}

use std::collections::{BTreeMap, HashSet};
use std::io::BufRead;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum FaithLabel {
    Faithful,
    Fake,
    Unclear,
}

impl FromStr for FaithLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "FAITHFUL" => Ok(FaithLabel::Faithful),
            "FAKE" => Ok(FaithLabel::Fake),
            "UNCLEAR" => Ok(FaithLabel::Unclear),
            other => Err(Error::Invalid(format!("unknown faithfulness label {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelCounts {
    pub faithful: usize,
    pub fake: usize,
    pub unclear: usize,
}

impl LabelCounts {
    pub fn total(&self) -> usize {
        self.faithful + self.fake + self.unclear
    }

    fn add(&mut self, label: FaithLabel) {
        match label {
            FaithLabel::Faithful => self.faithful += 1,
            FaithLabel::Fake => self.fake += 1,
            FaithLabel::Unclear => self.unclear += 1,
        }
    }
}

/// Counts per system, keyed by system id.
pub type FaithTally = BTreeMap<String, LabelCounts>;

/// Tallies a `system_id<TAB>example_id<TAB>label` annotation stream. Blank
/// lines are skipped, as is a leading header whose label column reads
/// `label`. Each (system, example) pair may be labelled once.
pub fn faithfulness_tally<R: BufRead>(reader: R) -> Result<FaithTally> {
    let mut tally = FaithTally::new();
    let mut seen = HashSet::new();
    for (i, line) in reader.lines().enumerate() {
        let loc = || format!("annotation line {}", i + 1);
        let line = line.map_err(|e| Error::parse(loc(), e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
        if cols.len() != 3 {
            return Err(Error::parse(loc(), format!("expected 3 tab-separated columns, found {}", cols.len())));
        }
        if i == 0 && cols[2].eq_ignore_ascii_case("label") {
            continue;
        }
        let label: FaithLabel = cols[2].parse().map_err(|e: Error| Error::parse(loc(), e.to_string()))?;
        if !seen.insert((cols[0].to_string(), cols[1].to_string())) {
            return Err(Error::parse(loc(), format!("example {} of {} labelled twice", cols[1], cols[0])));
        }
        tally.entry(cols[0].to_string()).or_default().add(label);
    }
    Ok(tally)
}

pub fn read_faithfulness(path: &Path) -> Result<FaithTally> {
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    faithfulness_tally(std::io::BufReader::new(f))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_count() {
        let t = faithfulness_tally(&b"s\t1\tFAITHFUL\ns\t2\tFAKE\ns\t3\tFAITHFUL\n"[..]).unwrap();
        assert_eq!(t["s"], LabelCounts { faithful: 2, fake: 1, unclear: 0 });
    }

    #[test]
    fn empty_input_has_no_systems() {
        assert!(faithfulness_tally(&b""[..]).unwrap().is_empty());
    }

    #[test]
    fn header_and_errors() {
        let t = faithfulness_tally(&b"system_id\texample_id\tlabel\na\t1\tUNCLEAR\n"[..]).unwrap();
        assert_eq!(t["a"].unclear, 1);
        assert!(faithfulness_tally(&b"a\t1\tMAYBE\n"[..]).is_err());
        assert!(faithfulness_tally(&b"a\t1\n"[..]).is_err());
        assert!(faithfulness_tally(&b"a\t1\tFAKE\na\t1\tFAKE\n"[..]).is_err());
    }
}

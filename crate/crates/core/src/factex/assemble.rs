use super::deps::{default_labels, extract_dep_tuples, merge_tuples};
use super::triples::{dedup_triples, surviving, triple_to_fact};
use super::types::{word_bag, DepTree, FactDesc, FactSeq, Triple, WordBag};
use crate::corpus::text::normalize_token;

pub const DEFAULT_REPORTING_LEMMAS: &[&str] = &["say", "declare", "announce"];

const IRREGULAR: &[(&str, &str)] = &[("said", "say")];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactConfig {
    pub labels: Vec<String>,
    pub reporting_filter: bool,
    pub reporting_lemmas: Vec<String>,
}

impl Default for FactConfig {
    fn default() -> Self {
        FactConfig {
            labels: default_labels(),
            reporting_filter: true,
            reporting_lemmas: DEFAULT_REPORTING_LEMMAS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

/// Maps a form onto a lemma of `lemmas` by stripping `-s`, `-d` or `-ed`,
/// or through the small irregular table.
fn reporting_lemma<S: AsRef<str>>(form: &str, lemmas: &[S]) -> Option<String> {
    let form = normalize_token(form);
    let known = |w: &str| lemmas.iter().any(|l| l.as_ref() == w);
    if known(&form) {
        return Some(form);
    }
    if let Some((_, lemma)) = IRREGULAR.iter().find(|(f, _)| *f == form) {
        return known(lemma).then(|| lemma.to_string());
    }
    ["s", "d", "ed"]
        .iter()
        .filter_map(|suffix| form.strip_suffix(suffix))
        .find(|stem| known(stem))
        .map(String::from)
}

/// Drops "somebody said"-style descriptions: those ending in a reporting
/// verb, so that nothing but subject material precedes it.
pub fn filter_reporting<S: AsRef<str>>(facts: Vec<FactDesc>, enabled: bool, lemmas: &[S]) -> Vec<FactDesc> {
    if !enabled {
        return facts;
    }
    facts
        .into_iter()
        .filter(|f| {
            let last = f.tokens().last().map(|(_, w)| w.as_str()).unwrap_or_default();
            reporting_lemma(last, lemmas).is_none()
        })
        .collect()
}

/// Triple-derived facts first, then dependency-derived facts that are not
/// covered by a triple fact.
pub fn assemble_fact_sequence(triple_facts: Vec<FactDesc>, dep_facts: Vec<FactDesc>) -> FactSeq {
    let bag = |f: &FactDesc| -> WordBag { word_bag(f.forms()) };
    let triple_bags: Vec<WordBag> = triple_facts.iter().map(bag).collect();
    // retained triple facts are the survivors among themselves
    let retained: Vec<usize> = surviving(&triple_bags);
    let mut facts: Vec<FactDesc> = retained.iter().map(|i| triple_facts[*i].clone()).collect();
    for d in dep_facts {
        let b = bag(&d);
        let covered = retained
            .iter()
            .any(|i| super::types::sub_bag(&b, &triple_bags[*i]));
        if !covered {
            facts.push(d);
        }
    }
    FactSeq { facts }
}

/// Full per-sentence pipeline: triple dedup and rendering, dependency tuple
/// extraction and merging, combination, then the reporting-verb filter.
pub fn extract_facts(tree: Option<&DepTree>, triples: &[Triple], config: &FactConfig) -> FactSeq {
    let triple_facts: Vec<FactDesc> = dedup_triples(triples).iter().map(triple_to_fact).collect();
    let dep_facts = tree
        .map(|t| merge_tuples(&extract_dep_tuples(t, &config.labels)))
        .unwrap_or_default();
    let seq = assemble_fact_sequence(triple_facts, dep_facts);
    FactSeq {
        facts: filter_reporting(seq.facts, config.reporting_filter, &config.reporting_lemmas),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fact(s: &str) -> FactDesc {
        FactDesc::new(
            s.split_whitespace()
                .enumerate()
                .map(|(i, w)| (i + 1, w.to_string()))
                .collect(),
        )
        .unwrap()
    }

    fn lemmas() -> Vec<String> {
        FactConfig::default().reporting_lemmas
    }

    #[test]
    fn reporting_pattern_is_dropped() {
        assert!(filter_reporting(vec![fact("dealers said")], true, &lemmas()).is_empty());
        for s in ["he says", "they declared", "nasa announced", "it announces", "she declares"] {
            assert!(filter_reporting(vec![fact(s)], true, &lemmas()).is_empty(), "{s}");
        }
    }

    #[test]
    fn other_facts_pass() {
        let keep = vec![fact("prices opened"), fact("officials announced plan")];
        assert_eq!(filter_reporting(keep.clone(), true, &lemmas()), keep);
        assert_eq!(filter_reporting(vec![fact("dealers said")], false, &lemmas()), vec![fact("dealers said")]);
        // "saying" is not a stripped form of any lemma
        assert_eq!(filter_reporting(vec![fact("he keeps saying")], true, &lemmas()).len(), 1);
    }

    #[test]
    fn separator_joining() {
        let seq = assemble_fact_sequence(vec![], vec![fact("taiwan share prices opened lower tuesday"), fact("dealers said")]);
        assert_eq!(seq.render(), "taiwan share prices opened lower tuesday ||| dealers said");
        assert!(assemble_fact_sequence(vec![], vec![]).flattened().is_empty());
        assert_eq!(assemble_fact_sequence(vec![fact("a b")], vec![]).render(), "a b");
    }

    #[test]
    fn dependency_facts_covered_by_triples_are_removed() {
        let seq = assemble_fact_sequence(
            vec![fact("repatriation was postponed friday")],
            vec![fact("repatriation postponed"), fact("unhcr pulled")],
        );
        assert_eq!(seq.render(), "repatriation was postponed friday ||| unhcr pulled");
    }

    #[test]
    fn triple_facts_come_first() {
        let seq = assemble_fact_sequence(vec![fact("x y z")], vec![fact("a b")]);
        assert_eq!(seq.render(), "x y z ||| a b");
    }

    proptest! {
        #[test]
        fn flattened_length_counts_separators(
            triples in prop::collection::vec(prop::collection::vec(0u8..6, 1..4), 0..4),
            deps in prop::collection::vec(prop::collection::vec(0u8..6, 1..4), 0..4),
        ) {
            let words = ["a", "b", "c", "d", "e", "f"];
            let mk = |v: &Vec<u8>| fact(&v.iter().map(|i| words[*i as usize]).collect::<Vec<_>>().join(" "));
            let seq = assemble_fact_sequence(triples.iter().map(mk).collect(), deps.iter().map(mk).collect());
            let total: usize = seq.facts.iter().map(|f| f.len()).sum();
            prop_assert_eq!(seq.flattened().len(), total + seq.facts.len().saturating_sub(1));
            let flat = seq.flattened();
            prop_assert!(flat.first().map_or(true, |t| t != "|||"));
            prop_assert!(flat.last().map_or(true, |t| t != "|||"));
            prop_assert!(!flat.windows(2).any(|w| w[0] == "|||" && w[1] == "|||"));
        }
    }
}

use super::types::{sub_bag, word_bag, FactDesc, Triple, WordBag};
use crate::corpus::text::normalize_token;

fn triple_bag(t: &Triple) -> WordBag {
    word_bag(t.tokens().map(|tok| tok.form.as_str()))
}

/// Indices of the entries that survive coverage-based deduplication: an
/// entry is dropped when its word multiset is strictly contained in another
/// entry's, or equals that of an earlier entry.
pub(crate) fn surviving(bags: &[WordBag]) -> Vec<usize> {
    (0..bags.len())
        .filter(|&i| {
            !(0..bags.len()).any(|j| {
                j != i && sub_bag(&bags[i], &bags[j]) && (j < i || !sub_bag(&bags[j], &bags[i]))
            })
        })
        .collect()
}

/// Removes every triple whose words are all covered by another retained
/// triple (multiset inclusion over normalized forms).
pub fn dedup_triples(triples: &[Triple]) -> Vec<Triple> {
    let bags: Vec<WordBag> = triples.iter().map(triple_bag).collect();
    surviving(&bags)
        .into_iter()
        .map(|i| triples[i].clone())
        .collect()
}

/// Joins subject, predicate and object into one description. Source indices
/// are kept when every token has one and they increase along the joined
/// order; otherwise positions `1..=n` are assigned.
pub fn triple_to_fact(triple: &Triple) -> FactDesc {
    let toks: Vec<_> = triple.tokens().collect();
    let given: Option<Vec<usize>> = toks.iter().map(|t| t.index).collect();
    let indices = match given {
        Some(ix) if ix.windows(2).all(|w| w[0] < w[1]) => ix,
        _ => (1..=toks.len()).collect(),
    };
    FactDesc::new(
        indices
            .into_iter()
            .zip(&toks)
            .map(|(i, t)| (i, normalize_token(&t.form)))
            .collect(),
    )
    .expect("validated triples have at least two tokens")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factex::types::Token;
    use proptest::prelude::*;

    fn t(s: &str, p: &str, o: &str) -> Triple {
        Triple::from_strs(s, p, o).unwrap()
    }

    #[test]
    fn granularity_variants_collapse_to_the_longest() {
        let triples = vec![
            t("I", "saw", "cat"),
            t("I", "saw", "cat sitting"),
            t("I", "saw", "cat sitting on desk"),
        ];
        let kept = dedup_triples(&triples);
        assert_eq!(kept, vec![t("I", "saw", "cat sitting on desk")]);
        assert_eq!(triple_to_fact(&kept[0]).render(), "i saw cat sitting on desk");
    }

    #[test]
    fn single_and_disjoint() {
        assert_eq!(dedup_triples(&[t("a", "b", "c")]), vec![t("a", "b", "c")]);
        let two = vec![t("a", "b", "c"), t("x", "y", "z")];
        assert_eq!(dedup_triples(&two), two);
    }

    #[test]
    fn identical_bags_keep_the_earlier() {
        let triples = vec![t("x", "saw", "y"), t("y", "saw", "x"), t("x", "saw", "y")];
        assert_eq!(dedup_triples(&triples), vec![t("x", "saw", "y")]);
    }

    #[test]
    fn multiplicity_matters() {
        let triples = vec![t("the man", "met", "the woman"), t("man", "met", "the woman")];
        assert_eq!(dedup_triples(&triples), vec![t("the man", "met", "the woman")]);
        let rev = vec![t("a a", "b", ""), t("a", "b", "c")];
        assert_eq!(dedup_triples(&rev), rev);
    }

    #[test]
    fn rendering() {
        assert_eq!(
            triple_to_fact(&t("repatriation", "was postponed", "friday")).render(),
            "repatriation was postponed friday"
        );
        assert_eq!(triple_to_fact(&t("dealers", "said", "")).render(), "dealers said");
    }

    #[test]
    fn indices_are_kept_when_ordered() {
        let tr = Triple::new(
            vec![Token::at("repatriation", 2)],
            vec![Token::at("was", 9), Token::at("postponed", 10)],
            vec![Token::at("friday", 11)],
        )
        .unwrap();
        let f = triple_to_fact(&tr);
        assert_eq!(f.tokens().iter().map(|(i, _)| *i).collect::<Vec<_>>(), vec![2, 9, 10, 11]);

        let unordered = Triple::new(vec![Token::at("b", 5)], vec![Token::at("a", 1)], vec![]).unwrap();
        let f = triple_to_fact(&unordered);
        assert_eq!(f.tokens(), &[(1, "b".to_string()), (2, "a".to_string())]);
    }

    proptest! {
        #[test]
        fn no_retained_triple_is_covered_by_another(
            raw in prop::collection::vec(
                (prop::collection::vec(0u8..4, 1..3), prop::collection::vec(0u8..4, 1..3), prop::collection::vec(0u8..4, 0..3)),
                0..8,
            )
        ) {
            let words = ["a", "b", "c", "d"];
            let render = |v: &[u8]| v.iter().map(|i| words[*i as usize]).collect::<Vec<_>>().join(" ");
            let triples: Vec<Triple> = raw.iter().map(|(s, p, o)| t(&render(s), &render(p), &render(o))).collect();
            let kept = dedup_triples(&triples);
            for (i, a) in kept.iter().enumerate() {
                for (j, b) in kept.iter().enumerate() {
                    if i != j {
                        prop_assert!(!sub_bag(&triple_bag(a), &triple_bag(b)));
                    }
                }
            }
            for removed in triples.iter().filter(|x| !kept.contains(x)) {
                prop_assert!(kept.iter().any(|k| sub_bag(&triple_bag(removed), &triple_bag(k))));
            }
        }
    }
}

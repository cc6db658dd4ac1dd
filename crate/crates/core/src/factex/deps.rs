use std::collections::BTreeMap;

use super::types::{DepTree, DepTuple, FactDesc};
use crate::corpus::text::normalize_token;

/// Predicate-argument labels and the modifiers kept to complete them, plus
/// temporal/adverbial arcs so that modifiers of the predicate can join its
/// description.
pub const DEFAULT_LABELS: &[&str] = &[
    "nsubj", "nsubjpass", "csubj", "csubjpass", "dobj", "amod", "nummod", "compound", "advmod",
    "nmod:tmod", "obl:tmod",
];

pub fn default_labels() -> Vec<String> {
    DEFAULT_LABELS.iter().map(|s| s.to_string()).collect()
}

/// Arcs whose label is in `labels`, ordered by dependent index.
pub fn extract_dep_tuples<S: AsRef<str>>(tree: &DepTree, labels: &[S]) -> Vec<DepTuple> {
    tree.nodes()
        .iter()
        .filter(|n| n.head != 0 && labels.iter().any(|l| l.as_ref() == n.label))
        .map(|n| {
            let gov = tree.node(n.head).expect("validated tree");
            DepTuple {
                governor: (gov.index, gov.form.clone()),
                dependent: (n.index, n.form.clone()),
                label: n.label.clone(),
            }
        })
        .collect()
}

fn find(parent: &mut BTreeMap<usize, usize>, x: usize) -> usize {
    let p = parent[&x];
    if p == x {
        return x;
    }
    let root = find(parent, p);
    parent.insert(x, root);
    root
}

/// Groups tuples sharing a token into connected components and flattens
/// each into a description ordered by sentence position. Descriptions are
/// ordered by their first token.
pub fn merge_tuples(tuples: &[DepTuple]) -> Vec<FactDesc> {
    let mut forms: BTreeMap<usize, String> = BTreeMap::new();
    let mut parent: BTreeMap<usize, usize> = BTreeMap::new();
    for t in tuples {
        for (i, f) in [&t.governor, &t.dependent] {
            forms.entry(*i).or_insert_with(|| normalize_token(f));
            parent.entry(*i).or_insert(*i);
        }
    }
    for t in tuples {
        let a = find(&mut parent, t.governor.0);
        let b = find(&mut parent, t.dependent.0);
        if a != b {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            parent.insert(hi, lo);
        }
    }
    let mut groups: BTreeMap<usize, Vec<(usize, String)>> = BTreeMap::new();
    let indices: Vec<usize> = forms.keys().copied().collect();
    for i in indices {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push((i, forms[&i].clone()));
    }
    // roots are component minima, so BTreeMap order is first-token order
    groups
        .into_values()
        .map(|toks| FactDesc::new(toks).expect("indices come from an ordered map"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factex::types::DepNode;
    use proptest::prelude::*;

    fn tuple(g: (usize, &str), d: (usize, &str)) -> DepTuple {
        DepTuple {
            governor: (g.0, g.1.into()),
            dependent: (d.0, d.1.into()),
            label: "x".into(),
        }
    }

    #[test]
    fn no_matching_labels() {
        let tree = DepTree::new(vec![
            DepNode { index: 1, form: "go".into(), head: 0, label: "root".into() },
            DepNode { index: 2, form: "!".into(), head: 1, label: "punct".into() },
        ])
        .unwrap();
        assert!(extract_dep_tuples(&tree, &default_labels()).is_empty());
    }

    #[test]
    fn single_subject_edge() {
        let tree = DepTree::new(vec![
            DepNode { index: 1, form: "dogs".into(), head: 2, label: "nsubj".into() },
            DepNode { index: 2, form: "bark".into(), head: 0, label: "root".into() },
            DepNode { index: 3, form: "loudly".into(), head: 2, label: "advmod".into() },
        ])
        .unwrap();
        let got = extract_dep_tuples(&tree, &["nsubj"]);
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].governor, (2, "bark".into()));
        assert_eq!(got[0].dependent, (1, "dogs".into()));
    }

    #[test]
    fn single_tuple_merges_to_one_fact() {
        let facts = merge_tuples(&[tuple((2, "b"), (1, "a"))]);
        assert_eq!(facts.len(), 1);
        assert_eq!(facts[0].render(), "a b");
    }

    #[test]
    fn disjoint_tuples_stay_apart_in_index_order() {
        let facts = merge_tuples(&[tuple((7, "said"), (6, "dealers")), tuple((2, "rose"), (1, "prices"))]);
        let rendered: Vec<_> = facts.iter().map(|f| f.render()).collect();
        assert_eq!(rendered, vec!["prices rose", "dealers said"]);
    }

    #[test]
    fn empty_input() {
        assert!(merge_tuples(&[]).is_empty());
    }

    proptest! {
        #[test]
        fn partition_is_order_invariant(
            edges in prop::collection::vec((1usize..12, 1usize..12), 0..10),
            seed in any::<u64>(),
        ) {
            let tuples: Vec<DepTuple> = edges.iter()
                .filter(|(a, b)| a != b)
                .map(|(a, b)| tuple((*a, &format!("w{a}")), (*b, &format!("w{b}"))))
                .collect();
            let facts = merge_tuples(&tuples);

            let mut seen = std::collections::BTreeSet::new();
            for f in &facts {
                prop_assert!(f.tokens().windows(2).all(|w| w[0].0 < w[1].0));
                for (i, _) in f.tokens() {
                    prop_assert!(seen.insert(*i));
                }
            }
            let expected: std::collections::BTreeSet<usize> =
                tuples.iter().flat_map(|t| [t.governor.0, t.dependent.0]).collect();
            prop_assert_eq!(seen, expected);

            let mut shuffled = tuples.clone();
            let mut x = seed;
            for i in (1..shuffled.len()).rev() {
                x = x.wrapping_mul(6364136223846793005).wrapping_add(1);
                shuffled.swap(i, (x >> 33) as usize % (i + 1));
            }
            prop_assert_eq!(merge_tuples(&shuffled), facts);
        }
    }
}

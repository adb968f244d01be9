//! Majority-vote invariants under reordering and abstention.

use lfa_core::annotation::{consensus_table, merge_votes, Consensus};
use lfa_core::metrics::{AttributeSchema, AttributeSpec, AttributeTable};
use proptest::prelude::*;

/// Ballots of up to seven annotators over three labels, `None` for unknown.
fn ballot() -> impl Strategy<Value = Vec<Option<u8>>> {
    prop::collection::vec(prop::option::weighted(0.75, 0u8..3), 1..8)
}

/// Counts votes naively and picks the label above half the valid votes.
fn naive(votes: &[Option<u8>]) -> Consensus<u8> {
    let valid = votes.iter().filter(|v| v.is_some()).count();
    for l in 0..3u8 {
        let c = votes.iter().filter(|&&v| v == Some(l)).count();
        if c * 2 > valid {
            return Consensus {
                label: Some(l),
                agreement: Some(c as f64 / votes.len() as f64),
            };
        }
    }
    Consensus {
        label: None,
        agreement: None,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn matches_naive_count(votes in ballot()) {
        prop_assert_eq!(merge_votes(&votes, votes.len()).unwrap(), naive(&votes));
    }

    #[test]
    fn order_does_not_matter(
        (votes, shuffled) in ballot().prop_flat_map(|v| (Just(v.clone()), Just(v).prop_shuffle())),
    ) {
        let n = votes.len();
        prop_assert_eq!(merge_votes(&votes, n).unwrap(), merge_votes(&shuffled, n).unwrap());
    }

    /// Dropping an unknown vote shrinks the valid pool, so a strict
    /// majority can only get stronger.
    #[test]
    fn removing_an_unknown_keeps_the_winner(votes in ballot()) {
        let Some(pos) = votes.iter().position(|v| v.is_none()) else { return Ok(()) };
        let before = merge_votes(&votes, votes.len()).unwrap();
        let mut fewer = votes.clone();
        fewer.remove(pos);
        let after = merge_votes(&fewer, fewer.len()).unwrap();
        if before.label.is_some() {
            prop_assert_eq!(after.label, before.label);
        }
    }

    #[test]
    fn unanimity_gives_full_agreement(label in 0u8..3, n in 1usize..8) {
        let c = merge_votes(&vec![Some(label); n], n).unwrap();
        prop_assert_eq!(c, Consensus { label: Some(label), agreement: Some(1.0) });
    }
}

fn schema() -> AttributeSchema {
    AttributeSchema::new(vec![
        AttributeSpec::new("beard", &["mustache", "stubble", "no"]),
        AttributeSpec::new("glasses", &["yes", "no"]),
    ])
    .unwrap()
}

fn annotator(rows: &[(&str, [&str; 2])]) -> AttributeTable {
    let mut t = AttributeTable::new(schema());
    for (id, toks) in rows {
        t.insert_tokens(id, toks).unwrap();
    }
    t
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn table_is_invariant_to_annotator_order(
        cells in prop::collection::vec(
            prop::collection::vec(
                (prop::sample::select(vec!["mustache", "stubble", "no", "unknown"]),
                 prop::sample::select(vec!["yes", "no", "unknown"])),
                5,
            ),
            1..12,
        ),
        order in Just((0..5).collect::<Vec<usize>>()).prop_shuffle(),
    ) {
        // cells[image][annotator]
        let tables: Vec<AttributeTable> = (0..5)
            .map(|a| {
                let rows: Vec<(String, [&str; 2])> = cells
                    .iter()
                    .enumerate()
                    .map(|(i, c)| (format!("img{i}"), [c[a].0, c[a].1]))
                    .collect();
                let rows: Vec<(&str, [&str; 2])> = rows.iter().map(|(i, t)| (i.as_str(), *t)).collect();
                annotator(&rows)
            })
            .collect();
        let shuffled: Vec<AttributeTable> = order.iter().map(|&i| tables[i].clone()).collect();
        prop_assert_eq!(consensus_table(&tables, false).unwrap(), consensus_table(&shuffled, false).unwrap());
    }
}

#[test]
fn one_silent_annotator_caps_agreement() {
    let mut tables: Vec<AttributeTable> = (0..4)
        .map(|_| annotator(&[("a", ["stubble", "yes"]), ("b", ["no", "no"])]))
        .collect();
    tables.push(annotator(&[
        ("a", ["unknown", "unknown"]),
        ("b", ["unknown", "unknown"]),
    ]));
    let c = consensus_table(&tables, false).unwrap();
    for row in &c.agreement {
        for a in row {
            assert_eq!(*a, Some(0.8));
        }
    }
    assert_eq!(c.labels[0], vec![Some(1), Some(0)]);
}

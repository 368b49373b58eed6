//! Property tests for the count-table algebra: merge commutes and
//! associates, aggregation distributes over concatenation, and the
//! marginal identities survive every operation.

use proplint::access_paths::{AccessPath, BuiltinKind, Step};
use proplint::frontend::Span;
use proplint::miner::{aggregate, load_table, merge, save_table, CountTable, Observation, PairKey};
use proptest::prelude::*;
use std::sync::Arc;

fn arb_path() -> impl Strategy<Value = AccessPath> {
    let root = prop_oneof![
        "[a-z]{1,6}".prop_map(AccessPath::require),
        Just(AccessPath::builtin(BuiltinKind::String)),
        Just(AccessPath::builtin(BuiltinKind::Array)),
        Just(AccessPath::builtin(BuiltinKind::Number)),
    ];
    let step = prop_oneof![
        "[a-z]{1,4}".prop_map(Step::Prop),
        Just(Step::Call),
        (0u32..3).prop_map(Step::Arg),
        Just(Step::New),
    ];
    (root, proptest::collection::vec(step, 0..4)).prop_map(|(mut p, steps)| {
        p.steps = steps;
        p
    })
}

fn arb_observation() -> impl Strategy<Value = Observation> {
    (arb_path(), "[a-z]{1,5}", 1u32..40, 1u32..60).prop_map(|(path, prop, line, col)| {
        Observation {
            key: PairKey::new(path, prop),
            span: Span::new(Arc::from("gen.js"), (line, col), (line, col + 2)),
        }
    })
}

fn arb_observations(max: usize) -> impl Strategy<Value = Vec<Observation>> {
    proptest::collection::vec(arb_observation(), 0..max)
}

/// The three marginal identities of a count table.
fn assert_consistent(table: &CountTable) {
    let mut total = 0u64;
    let mut by_path: std::collections::BTreeMap<&AccessPath, u64> = Default::default();
    let mut by_prop: std::collections::BTreeMap<&str, u64> = Default::default();
    for (key, k) in table.pairs() {
        assert!(k >= 1);
        total += k;
        *by_path.entry(&key.path).or_default() += k;
        *by_prop.entry(&key.prop).or_default() += k;
    }
    assert_eq!(table.total(), total);
    for (path, sum) in by_path {
        assert_eq!(table.path_total(path), sum);
    }
    for (prop, sum) in by_prop {
        assert_eq!(table.prop_total(prop), sum);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn merge_commutes_and_associates(
        a in arb_observations(30),
        b in arb_observations(30),
        c in arb_observations(30),
    ) {
        let (ta, tb, tc) = (aggregate(a), aggregate(b), aggregate(c));
        prop_assert_eq!(merge(ta.clone(), tb.clone()), merge(tb.clone(), ta.clone()));
        prop_assert_eq!(
            merge(merge(ta.clone(), tb.clone()), tc.clone()),
            merge(ta.clone(), merge(tb.clone(), tc.clone()))
        );
        prop_assert_eq!(merge(ta.clone(), CountTable::new()), ta);
    }

    #[test]
    fn aggregate_distributes_over_concatenation(
        a in arb_observations(40),
        b in arb_observations(40),
    ) {
        let joined: Vec<Observation> = a.iter().cloned().chain(b.iter().cloned()).collect();
        let merged = merge(aggregate(a), aggregate(b));
        let direct = aggregate(joined);
        prop_assert_eq!(&merged, &direct);
        assert_consistent(&merged);
    }

    #[test]
    fn marginals_hold_after_every_operation(
        a in arb_observations(40),
        b in arb_observations(40),
    ) {
        let ta = aggregate(a);
        assert_consistent(&ta);
        let tb = aggregate(b);
        let merged = merge(ta, tb);
        assert_consistent(&merged);
        let mut buf = Vec::new();
        save_table(&merged, &mut buf).unwrap();
        let loaded = load_table(std::io::Cursor::new(&buf), "mem").unwrap();
        prop_assert_eq!(&loaded, &merged);
        assert_consistent(&loaded);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn rendered_paths_round_trip(path in arb_path()) {
        let rendered = path.render();
        let parsed = proplint::access_paths::parse_path(&rendered).unwrap();
        prop_assert_eq!(parsed, path);
    }
}

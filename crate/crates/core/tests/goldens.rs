//! Golden tests over the bundled mini corpus: hand-counted pair manifest,
//! hand-applied labeling rules, and hand-derived classification.

mod common;

use common::testdata;
use proplint::cli::{discover_sources, mine_files};
use proplint::config::RunConfig;
use proplint::miner::{load_table_from, save_table};
use proplint::stats::{classify_all, Classification};
use proplint::validation::{build_validation_set, load_model, LabelSet};

fn mined_table() -> proplint::miner::CountTable {
    let files = discover_sources(&[testdata("mini_corpus")], false).unwrap();
    assert_eq!(files.len(), 8, "corpus should have 8 files");
    let (table, observations, errors) = mine_files(&files, &RunConfig::default());
    assert!(errors.is_empty(), "parse errors: {errors:?}");
    assert_eq!(observations.len() as u64, table.total());
    table
}

#[test]
fn mini_corpus_counts_match_hand_counted_manifest() {
    let table = mined_table();
    let golden = load_table_from(&testdata("golden/mini_corpus_pairs.tsv")).unwrap();
    if table != golden {
        let mut got = Vec::new();
        save_table(&table, &mut got).unwrap();
        panic!(
            "mined counts diverge from the hand-counted manifest; mined:\n{}",
            String::from_utf8(got).unwrap()
        );
    }
    assert_eq!(table.total(), 30);
    assert_eq!(table.unique_pairs(), 23);
}

#[test]
fn mini_corpus_labels_match_hand_applied_rules() {
    let table = mined_table();
    let model = load_model(&testdata("models/node_api.toml")).unwrap();
    let (labels, summary) = build_validation_set(&table, &model).unwrap();

    let golden_file = std::fs::File::open(testdata("golden/mini_corpus_labels.tsv")).unwrap();
    let golden = LabelSet::load(std::io::BufReader::new(golden_file), "golden").unwrap();
    assert_eq!(labels, golden);
    assert_eq!(labels.incorrect_count(), 3);

    // per-root summaries stay consistent with the labels
    let fs_row = summary.iter().find(|r| r.root == "fs").unwrap();
    assert_eq!(fs_row.incorrect_unique, 1); // fs.size
    assert_eq!(fs_row.unclassified_unique, 1); // fs.exists2
}

#[test]
fn mini_corpus_classification_matches_hand_derivation() {
    // By hand with the summation oracle: the largest marginal in the
    // corpus is n_path(require('fs')) = 13, so every BCDF(k, n, r) with
    // r <= 0.25 stays far above the default confidence thresholds of
    // 0.005: nothing is anomalous. Only <require('fs'), readFile> has
    // k >= 5 with neither rarity condition holding, so it is expected;
    // <require('fs').readFileSync(), toString> is excluded; the rest are
    // unknown.
    let table = mined_table();
    let classes = classify_all(
        &table,
        &Default::default(),
        proplint::stats::DEFAULT_MIN_SUPPORT,
        &proplint::stats::default_excluded_props(),
    );
    let golden = std::fs::read_to_string(testdata("golden/mini_corpus_classes.tsv")).unwrap();
    let mut rows: Vec<(String, String, String)> = classes
        .iter()
        .map(|(key, class)| (key.path.render(), key.prop.clone(), class.to_string()))
        .collect();
    rows.sort();
    let got: String = rows
        .into_iter()
        .map(|(p, prop, c)| format!("{p}\t{prop}\t{c}\n"))
        .collect();
    assert_eq!(got, golden);
    assert_eq!(
        classes
            .values()
            .filter(|c| **c == Classification::Expected)
            .count(),
        1
    );
    assert_eq!(
        classes
            .values()
            .filter(|c| **c == Classification::Anomalous)
            .count(),
        0
    );
}

#[test]
fn observation_log_rows_point_into_their_files() {
    let files = discover_sources(&[testdata("mini_corpus")], false).unwrap();
    let (_, observations, _) = mine_files(&files, &RunConfig::default());
    for obs in &observations {
        let file = files
            .iter()
            .find(|f| f.path.to_string_lossy() == obs.span.file.as_ref())
            .expect("observation names a corpus file");
        let line_count = file.text.lines().count() as u32;
        assert!(obs.span.start_line >= 1 && obs.span.start_line <= line_count);
        let line = file.text.lines().nth((obs.span.start_line - 1) as usize).unwrap();
        assert!((obs.span.start_col as usize) <= line.chars().count() + 1);
    }
}

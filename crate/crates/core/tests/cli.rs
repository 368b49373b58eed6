//! End-to-end runs of the `proplint` binary: pipeline wiring, exit codes,
//! and output determinism across worker counts.

mod common;

use common::testdata;
use std::path::Path;
use std::process::{Command, Output};

fn proplint(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_proplint"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn path_str(p: std::path::PathBuf) -> String {
    p.to_string_lossy().into_owned()
}

#[test]
fn full_pipeline_on_the_mini_corpus() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = path_str(testdata("mini_corpus"));
    let model = path_str(testdata("models/node_api.toml"));
    let pairs = path_str(tmp.path().join("pairs.tsv"));
    let obs = path_str(tmp.path().join("obs.tsv"));
    let labels = path_str(tmp.path().join("labels.tsv"));
    let anomalous = path_str(tmp.path().join("anomalous.tsv"));
    let sweep_csv = path_str(tmp.path().join("sweep.csv"));

    let out = proplint(
        &["mine", &corpus, "--out", &pairs, "--obs-log", &obs],
        tmp.path(),
    );
    assert!(out.status.success(), "mine failed: {out:?}");
    let mined = std::fs::read_to_string(&pairs).unwrap();
    let golden = std::fs::read_to_string(testdata("golden/mini_corpus_pairs.tsv")).unwrap();
    assert_eq!(mined, golden, "CLI mining must reproduce the manifest");
    assert_eq!(std::fs::read_to_string(&obs).unwrap().lines().count(), 30);

    let out = proplint(
        &["label", "--pairs", &pairs, "--model", &model, "--out", &labels, "--summary"],
        tmp.path(),
    );
    assert!(out.status.success(), "label failed: {out:?}");

    let out = proplint(
        &["classify", "--pairs", &pairs, "--out", &anomalous],
        tmp.path(),
    );
    assert!(out.status.success(), "classify failed: {out:?}");
    // default thresholds flag nothing at this corpus size
    assert_eq!(std::fs::read_to_string(&anomalous).unwrap(), "");

    let out = proplint(
        &["sweep", "--pairs", &pairs, "--labels", &labels, "--out", &sweep_csv],
        tmp.path(),
    );
    assert!(out.status.success(), "sweep failed: {out:?}");
    let sweep_text = std::fs::read_to_string(&sweep_csv).unwrap();
    assert_eq!(sweep_text.lines().count(), 4097, "header + 4096 rows");
}

#[test]
fn mine_edge_cases() {
    let tmp = tempfile::tempdir().unwrap();

    // empty directory: header-only pair file, exit 0
    let empty = tmp.path().join("empty");
    std::fs::create_dir(&empty).unwrap();
    let out_file = path_str(tmp.path().join("empty.tsv"));
    let out = proplint(
        &["mine", &path_str(empty), "--out", &out_file],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        std::fs::read_to_string(&out_file).unwrap(),
        "path\tprop\tcount\n"
    );

    // a single buggy file alone: exactly its two fs pairs
    let bad_call = path_str(testdata("fixtures/plain_bad_call.js"));
    let out_file = path_str(tmp.path().join("single.tsv"));
    let out = proplint(&["mine", &bad_call, "--out", &out_file], tmp.path());
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&out_file).unwrap();
    assert!(text.contains("require('fs')\treadFile\t1"), "{text}");
    assert!(text.contains("require('fs')\tsize\t1"), "{text}");

    // missing input directory: input error
    let out = proplint(
        &["mine", "definitely_missing_dir", "--out", "x.tsv"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(3));

    // help exits 0
    let out = proplint(&["--help"], tmp.path());
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn check_exit_codes_and_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let anomalous = tmp.path().join("anomalous.tsv");
    std::fs::write(
        &anomalous,
        "require('fs')\tsize\nrequire('fs').openSync()\tsize\n",
    )
    .unwrap();
    let anomalous = path_str(anomalous);

    // monkey patch: safe via H1, exit 0
    let patched = path_str(testdata("fixtures/monkey_patch.js"));
    let out = proplint(&["check", &patched, "--anomalous", &anomalous], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("SAFE(H1)"), "stdout: {stdout}");

    // plain bad call: one unsafe finding, exit 1
    let bad_call = path_str(testdata("fixtures/plain_bad_call.js"));
    let json = path_str(tmp.path().join("report.json"));
    let out = proplint(
        &["check", &bad_call, "--anomalous", &anomalous, "--json", &json],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(1), "{out:?}");
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("UNSAFE"), "stdout: {stdout}");

    // overlap report over the JSON findings
    let out = proplint(&["report", "--findings", &json], tmp.path());
    assert_eq!(out.status.code(), Some(0));

    // usage error: unknown flag
    let out = proplint(&["check", "--bogus"], tmp.path());
    assert_eq!(out.status.code(), Some(2));

    // input error: missing pair file
    let out = proplint(
        &["classify", "--pairs", "no_such_file.tsv", "--out", "x.tsv"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(3));

    // input format error: malformed pair file
    let bad = tmp.path().join("bad.tsv");
    std::fs::write(&bad, "not a header\n").unwrap();
    let out = proplint(
        &["classify", "--pairs", &path_str(bad), "--out", "x.tsv"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn bug_fixtures_flag_the_documented_lines() {
    let tmp = tempfile::tempdir().unwrap();
    let anomalous = tmp.path().join("anomalous.tsv");
    std::fs::write(
        &anomalous,
        "require('path')\tlength\nrequire('fs').readFileSync().toString().split()\tsize\n",
    )
    .unwrap();
    let anomalous = path_str(anomalous);

    let ex1 = path_str(testdata("fixtures/shadowed_import.js"));
    let out = proplint(&["check", &ex1, "--anomalous", &anomalous], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    let stdout = String::from_utf8(out.stdout).unwrap();
    let unsafe_rows: Vec<&str> = stdout.lines().filter(|l| l.ends_with("UNSAFE")).collect();
    assert_eq!(unsafe_rows.len(), 1, "{stdout}");
    assert!(unsafe_rows[0].contains(":3:"), "expected line 3: {stdout}");
    assert!(unsafe_rows[0].contains("length"));

    let ex2 = path_str(testdata("fixtures/split_size.js"));
    let out = proplint(&["check", &ex2, "--anomalous", &anomalous], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    let stdout = String::from_utf8(out.stdout).unwrap();
    let unsafe_rows: Vec<&str> = stdout.lines().filter(|l| l.ends_with("UNSAFE")).collect();
    assert_eq!(unsafe_rows.len(), 1, "{stdout}");
    assert!(unsafe_rows[0].contains(":9:"), "expected line 9: {stdout}");
    assert!(unsafe_rows[0].contains("size"));
}

#[test]
fn crossval_is_byte_identical_across_runs_and_worker_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = path_str(testdata("mini_corpus"));
    let model = path_str(testdata("models/node_api.toml"));
    let pairs = path_str(tmp.path().join("pairs.tsv"));
    let labels = path_str(tmp.path().join("labels.tsv"));

    assert!(proplint(&["mine", &corpus, "--out", &pairs], tmp.path())
        .status
        .success());
    assert!(proplint(
        &["label", "--pairs", &pairs, "--model", &model, "--out", &labels],
        tmp.path()
    )
    .status
    .success());

    let mut outputs = Vec::new();
    for (i, workers) in ["1", "8", "1"].iter().enumerate() {
        let out_file = path_str(tmp.path().join(format!("folds{i}.csv")));
        let out = proplint(
            &[
                "crossval", "--pairs", &pairs, "--labels", &labels, "--out", &out_file,
                "--seed", "42", "--workers", workers,
            ],
            tmp.path(),
        );
        assert!(out.status.success(), "crossval failed: {out:?}");
        outputs.push(std::fs::read(&out_file).unwrap());
    }
    assert_eq!(outputs[0], outputs[1], "workers 1 vs 8 differ");
    assert_eq!(outputs[0], outputs[2], "two identical runs differ");
}

#[test]
fn mining_is_independent_of_worker_count() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = path_str(testdata("mini_corpus"));
    let one = path_str(tmp.path().join("one.tsv"));
    let eight = path_str(tmp.path().join("eight.tsv"));
    assert!(proplint(
        &["mine", &corpus, "--out", &one, "--workers", "1"],
        tmp.path()
    )
    .status
    .success());
    assert!(proplint(
        &["mine", &corpus, "--out", &eight, "--workers", "8"],
        tmp.path()
    )
    .status
    .success());
    assert_eq!(
        std::fs::read(&one).unwrap(),
        std::fs::read(&eight).unwrap()
    );
}

#[test]
fn config_file_overrides_flags() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = path_str(testdata("mini_corpus"));
    let pairs = path_str(tmp.path().join("pairs.tsv"));
    assert!(proplint(&["mine", &corpus, "--out", &pairs], tmp.path())
        .status
        .success());

    // config pins min_support to 1, so <fs, existsSync> (k=2) would still
    // not be expected; but readFile (k=6) always is. The point under test:
    // the config's thresholds win over contradictory flags.
    let config = tmp.path().join("run.toml");
    std::fs::write(
        &config,
        "[thresholds]\np_a = 0.25\np_prop = 0.25\np_ca = 1.0\np_cprop = 1.0\n",
    )
    .unwrap();
    let with_config = path_str(tmp.path().join("a.tsv"));
    let out = proplint(
        &[
            "classify", "--pairs", &pairs, "--out", &with_config,
            "--config", &path_str(config),
            "--p-a", "0.005", "--p-prop", "0.005", "--p-ca", "0.005", "--p-cprop", "0.005",
        ],
        tmp.path(),
    );
    assert!(out.status.success(), "{out:?}");
    // the loose config flags several pairs; the strict flags would flag none
    let text = std::fs::read_to_string(&with_config).unwrap();
    assert!(!text.is_empty(), "config thresholds should have applied");
}

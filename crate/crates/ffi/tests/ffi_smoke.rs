//! Exercises the C ABI end to end through the exported symbols, the same
//! way a foreign binding would.

use proplint_ffi::*;
use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::ptr;

fn c_path(p: &Path) -> CString {
    CString::new(p.to_str().unwrap()).unwrap()
}

fn core_testdata(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/testdata")
        .join(rel)
}

#[test]
fn version_and_last_error_are_readable() {
    unsafe {
        let v = CStr::from_ptr(pp_version());
        assert!(!v.to_str().unwrap().is_empty());
        let e = CStr::from_ptr(pp_last_error());
        assert_eq!(e.to_str().unwrap(), "");
    }
}

#[test]
fn bcdf_matches_library_and_reports_domain_errors() {
    unsafe {
        let mut out = f64::NAN;
        assert_eq!(pp_bcdf(2, 10, 0.5, &mut out), PpStatus::PpOk);
        assert!((out - 56.0 / 1024.0).abs() < 1e-14);

        assert_eq!(pp_bcdf(11, 10, 0.5, &mut out), PpStatus::PpDomainError);
        let msg = CStr::from_ptr(pp_last_error()).to_str().unwrap();
        assert!(msg.contains("exceeds"), "message: {msg}");

        assert_eq!(
            pp_bcdf(1, 10, 0.5, ptr::null_mut()),
            PpStatus::PpNullArgument
        );
    }
}

#[test]
fn mine_classify_check_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    unsafe {
        // mine the bundled corpus
        let corpus = c_path(&core_testdata("mini_corpus"));
        let mut table: *mut PpCountTable = ptr::null_mut();
        assert_eq!(pp_table_mine_dir(corpus.as_ptr(), &mut table), PpStatus::PpOk);
        assert_eq!(pp_table_total(table), 30);
        assert_eq!(pp_table_unique_pairs(table), 23);

        // save / load round trip
        let saved = tmp.path().join("pairs.tsv");
        let saved_c = c_path(&saved);
        assert_eq!(pp_table_save(table, saved_c.as_ptr()), PpStatus::PpOk);
        let mut loaded: *mut PpCountTable = ptr::null_mut();
        assert_eq!(pp_table_load(saved_c.as_ptr(), &mut loaded), PpStatus::PpOk);
        assert_eq!(pp_table_total(loaded), 30);

        // merging doubles every count
        assert_eq!(pp_table_merge(loaded, table), PpStatus::PpOk);
        assert_eq!(pp_table_total(loaded), 60);

        // loose thresholds flag the seeded bugs
        let config = PpModelConfig {
            p_a: 0.25,
            p_prop: 0.25,
            p_ca: 1.0,
            p_cprop: 1.0,
            min_support: 5,
        };
        let mut anomalous: *mut PpPairList = ptr::null_mut();
        assert_eq!(
            pp_classify_anomalous(table, &config, &mut anomalous),
            PpStatus::PpOk
        );
        let n = pp_pair_list_len(anomalous);
        assert_eq!(n, 4);
        let mut entries = Vec::new();
        for i in 0..n {
            let entry = pp_pair_list_get(anomalous, i);
            assert!(!entry.is_null());
            entries.push(CStr::from_ptr(entry).to_str().unwrap().to_string());
        }
        assert!(entries.contains(&"require('fs')\tsize".to_string()), "{entries:?}");
        assert!(pp_pair_list_get(anomalous, n).is_null());

        pp_table_free(table);
        pp_table_free(loaded);
        pp_pair_list_free(anomalous);
    }
}

#[test]
fn checking_a_fixture_directory_counts_unsafe_findings() {
    let tmp = tempfile::tempdir().unwrap();
    // stage the plain bad call and the guarded access together; the
    // monkey-patch fixture would suppress the plain call through H1
    for name in ["plain_bad_call.js", "guarded_access.js"] {
        std::fs::copy(core_testdata(&format!("fixtures/{name}")), tmp.path().join(name)).unwrap();
    }
    let list_path = tmp.path().join("anomalous.tsv");
    std::fs::write(&list_path, "require('fs')\tsize\n").unwrap();

    unsafe {
        let mut list: *mut PpPairList = ptr::null_mut();
        let list_c = c_path(&list_path);
        assert_eq!(pp_pair_list_load(list_c.as_ptr(), &mut list), PpStatus::PpOk);
        assert_eq!(pp_pair_list_len(list), 1);

        let dir_c = c_path(tmp.path());
        let mut findings: *mut PpFindings = ptr::null_mut();
        assert_eq!(pp_check_dir(dir_c.as_ptr(), list, &mut findings), PpStatus::PpOk);
        // the plain call is unsafe; the guarded file has two safe findings
        assert_eq!(pp_findings_len(findings), 3);
        assert_eq!(pp_findings_unsafe_len(findings), 1);

        let mut text: *mut std::os::raw::c_char = ptr::null_mut();
        assert_eq!(pp_findings_render_text(findings, &mut text), PpStatus::PpOk);
        let rendered = CStr::from_ptr(text).to_str().unwrap().to_string();
        assert!(rendered.contains("UNSAFE"), "{rendered}");
        assert!(rendered.contains("SAFE(H2)"), "{rendered}");
        pp_string_free(text);

        pp_findings_free(findings);
        pp_pair_list_free(list);

        // missing directory surfaces as an IO error
        let missing = CString::new("/no/such/dir").unwrap();
        let mut t: *mut PpCountTable = ptr::null_mut();
        assert_eq!(pp_table_mine_dir(missing.as_ptr(), &mut t), PpStatus::PpIoError);
    }
}

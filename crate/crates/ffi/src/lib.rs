//! C ABI for the property-access checker: opaque handles over count
//! tables, anomalous-pair lists, and findings, with status-code error
//! reporting. The generated header lives in `include/proplint.h`.

use proplint::checker::{check, render_text_report, CheckReport};
use proplint::cli::{discover_sources, mine_files};
use proplint::config::RunConfig;
use proplint::miner::{load_table_from, merge, save_table_to, CountTable, PairKey};
use proplint::stats::{classify_all, Classification, ModelConfig};
use std::cell::RefCell;
use std::collections::BTreeSet;
use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

/// Status code returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PpStatus {
    PpOk = 0,
    PpNullArgument = 1,
    PpInvalidUtf8 = 2,
    PpIoError = 3,
    PpFormatError = 4,
    PpDomainError = 5,
    PpInvalidConfig = 6,
    PpInternalError = 7,
}

/// Model thresholds plus the expected-usage support floor.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct PpModelConfig {
    pub p_a: f64,
    pub p_prop: f64,
    pub p_ca: f64,
    pub p_cprop: f64,
    pub min_support: u64,
}

/// Opaque aggregate of mined pair counts.
pub struct PpCountTable {
    table: CountTable,
}

/// Opaque list of ⟨path, property⟩ pairs; entries render as
/// `path<TAB>prop`.
pub struct PpPairList {
    pairs: Vec<PairKey>,
    rendered: Vec<CString>,
}

/// Opaque checker findings.
pub struct PpFindings {
    report: CheckReport,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn fail(status: PpStatus, message: &str) -> PpStatus {
    set_error(message);
    status
}

/// Message for the most recent failure on this thread. Borrowed; valid
/// until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn pp_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn pp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

unsafe fn path_arg(ptr: *const c_char) -> Result<PathBuf, PpStatus> {
    if ptr.is_null() {
        set_error("null path argument");
        return Err(PpStatus::PpNullArgument);
    }
    match CStr::from_ptr(ptr).to_str() {
        Ok(s) => Ok(PathBuf::from(s)),
        Err(_) => {
            set_error("path is not valid UTF-8");
            Err(PpStatus::PpInvalidUtf8)
        }
    }
}

fn guarded(f: impl FnOnce() -> PpStatus) -> PpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(PpStatus::PpInternalError, "internal panic"),
    }
}

/// P(X <= k) for X ~ Binomial(n, p), written to `out`.
///
/// # Safety
/// `out` must point to writable memory for one f64.
#[no_mangle]
pub unsafe extern "C" fn pp_bcdf(k: u64, n: u64, p: f64, out: *mut f64) -> PpStatus {
    guarded(|| {
        if out.is_null() {
            return fail(PpStatus::PpNullArgument, "null output pointer");
        }
        match proplint::stats::bcdf(k, n, p) {
            Ok(v) => {
                unsafe { *out = v };
                PpStatus::PpOk
            }
            Err(e) => fail(PpStatus::PpDomainError, &e.to_string()),
        }
    })
}

/// Loads a pair-count file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pp_table_load(
    path: *const c_char,
    out: *mut *mut PpCountTable,
) -> PpStatus {
    guarded(|| {
        if out.is_null() {
            return fail(PpStatus::PpNullArgument, "null output pointer");
        }
        let path = match unsafe { path_arg(path) } {
            Ok(p) => p,
            Err(s) => return s,
        };
        match load_table_from(&path) {
            Ok(table) => {
                unsafe { *out = Box::into_raw(Box::new(PpCountTable { table })) };
                PpStatus::PpOk
            }
            Err(proplint::miner::PairFileError::Io(e)) => fail(PpStatus::PpIoError, &e.to_string()),
            Err(e) => fail(PpStatus::PpFormatError, &e.to_string()),
        }
    })
}

/// Mines every JavaScript source below `dir` into a fresh count table.
/// Per-file parse failures are skipped, matching the CLI behavior.
///
/// # Safety
/// `dir` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pp_table_mine_dir(
    dir: *const c_char,
    out: *mut *mut PpCountTable,
) -> PpStatus {
    guarded(|| {
        if out.is_null() {
            return fail(PpStatus::PpNullArgument, "null output pointer");
        }
        let dir = match unsafe { path_arg(dir) } {
            Ok(p) => p,
            Err(s) => return s,
        };
        let files = match discover_sources(&[dir], false) {
            Ok(f) => f,
            Err(e) => return fail(PpStatus::PpIoError, &e.to_string()),
        };
        let (table, _, _) = mine_files(&files, &RunConfig::default());
        unsafe { *out = Box::into_raw(Box::new(PpCountTable { table })) };
        PpStatus::PpOk
    })
}

/// Writes a table in the pair-count file format.
///
/// # Safety
/// `table` must come from this library and be live; `path` must be a
/// NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn pp_table_save(
    table: *const PpCountTable,
    path: *const c_char,
) -> PpStatus {
    guarded(|| {
        let Some(table) = (unsafe { table.as_ref() }) else {
            return fail(PpStatus::PpNullArgument, "null table");
        };
        let path = match unsafe { path_arg(path) } {
            Ok(p) => p,
            Err(s) => return s,
        };
        match save_table_to(&table.table, &path) {
            Ok(()) => PpStatus::PpOk,
            Err(e) => fail(PpStatus::PpIoError, &e.to_string()),
        }
    })
}

/// Adds `src` into `dst` pointwise.
///
/// # Safety
/// Both handles must come from this library and be live.
#[no_mangle]
pub unsafe extern "C" fn pp_table_merge(
    dst: *mut PpCountTable,
    src: *const PpCountTable,
) -> PpStatus {
    guarded(|| {
        let (Some(dst), Some(src)) = (unsafe { dst.as_mut() }, unsafe { src.as_ref() }) else {
            return fail(PpStatus::PpNullArgument, "null table");
        };
        let merged = merge(std::mem::take(&mut dst.table), src.table.clone());
        dst.table = merged;
        PpStatus::PpOk
    })
}

/// Total observation count of a table (0 for null).
///
/// # Safety
/// `table` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn pp_table_total(table: *const PpCountTable) -> u64 {
    unsafe { table.as_ref() }.map(|t| t.table.total()).unwrap_or(0)
}

/// Number of distinct pairs in a table (0 for null).
///
/// # Safety
/// `table` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn pp_table_unique_pairs(table: *const PpCountTable) -> u64 {
    unsafe { table.as_ref() }
        .map(|t| t.table.unique_pairs() as u64)
        .unwrap_or(0)
}

/// # Safety
/// `table` must be null or an owned handle from this library; it is freed.
#[no_mangle]
pub unsafe extern "C" fn pp_table_free(table: *mut PpCountTable) {
    if !table.is_null() {
        drop(unsafe { Box::from_raw(table) });
    }
}

fn new_pair_list(pairs: Vec<PairKey>) -> *mut PpPairList {
    let rendered = pairs
        .iter()
        .map(|k| CString::new(format!("{}\t{}", k.path.render(), k.prop)).unwrap_or_default())
        .collect();
    Box::into_raw(Box::new(PpPairList { pairs, rendered }))
}

/// Classifies a table and returns the anomalous pairs. Properties
/// inherited from Object.prototype are excluded, as in the CLI defaults.
///
/// # Safety
/// `table` must be live; `config` may be null for the tuned defaults;
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pp_classify_anomalous(
    table: *const PpCountTable,
    config: *const PpModelConfig,
    out: *mut *mut PpPairList,
) -> PpStatus {
    guarded(|| {
        let Some(table) = (unsafe { table.as_ref() }) else {
            return fail(PpStatus::PpNullArgument, "null table");
        };
        if out.is_null() {
            return fail(PpStatus::PpNullArgument, "null output pointer");
        }
        let (model, min_support) = match unsafe { config.as_ref() } {
            Some(c) => (
                ModelConfig::new(c.p_a, c.p_prop, c.p_ca, c.p_cprop),
                c.min_support.max(1),
            ),
            None => (ModelConfig::default(), proplint::stats::DEFAULT_MIN_SUPPORT),
        };
        if let Err(e) = model.validate() {
            return fail(PpStatus::PpInvalidConfig, &e);
        }
        let classes = classify_all(
            &table.table,
            &model,
            min_support,
            &proplint::stats::default_excluded_props(),
        );
        let pairs: Vec<PairKey> = classes
            .into_iter()
            .filter(|(_, c)| *c == Classification::Anomalous)
            .map(|(k, _)| k)
            .collect();
        unsafe { *out = new_pair_list(pairs) };
        PpStatus::PpOk
    })
}

/// Loads an anomalous-pair list file (`path<TAB>prop` rows).
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pp_pair_list_load(
    path: *const c_char,
    out: *mut *mut PpPairList,
) -> PpStatus {
    guarded(|| {
        if out.is_null() {
            return fail(PpStatus::PpNullArgument, "null output pointer");
        }
        let path = match unsafe { path_arg(path) } {
            Ok(p) => p,
            Err(s) => return s,
        };
        let file = match std::fs::File::open(&path) {
            Ok(f) => f,
            Err(e) => return fail(PpStatus::PpIoError, &e.to_string()),
        };
        match proplint::miner::load_pair_list(
            std::io::BufReader::new(file),
            &path.display().to_string(),
        ) {
            Ok(pairs) => {
                unsafe { *out = new_pair_list(pairs) };
                PpStatus::PpOk
            }
            Err(e) => fail(PpStatus::PpFormatError, &e.to_string()),
        }
    })
}

/// Entry count of a pair list (0 for null).
///
/// # Safety
/// `list` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn pp_pair_list_len(list: *const PpPairList) -> u64 {
    unsafe { list.as_ref() }.map(|l| l.pairs.len() as u64).unwrap_or(0)
}

/// Entry at `index` as a `path<TAB>prop` string, borrowed from the list;
/// null when out of range.
///
/// # Safety
/// `list` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn pp_pair_list_get(list: *const PpPairList, index: u64) -> *const c_char {
    unsafe { list.as_ref() }
        .and_then(|l| l.rendered.get(index as usize))
        .map(|c| c.as_ptr())
        .unwrap_or(std::ptr::null())
}

/// # Safety
/// `list` must be null or an owned handle from this library; it is freed.
#[no_mangle]
pub unsafe extern "C" fn pp_pair_list_free(list: *mut PpPairList) {
    if !list.is_null() {
        drop(unsafe { Box::from_raw(list) });
    }
}

/// Checks every JavaScript source below `dir` against the anomalous pairs.
///
/// # Safety
/// `dir` must be a NUL-terminated string; `anomalous` must be live; `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn pp_check_dir(
    dir: *const c_char,
    anomalous: *const PpPairList,
    out: *mut *mut PpFindings,
) -> PpStatus {
    guarded(|| {
        let Some(list) = (unsafe { anomalous.as_ref() }) else {
            return fail(PpStatus::PpNullArgument, "null pair list");
        };
        if out.is_null() {
            return fail(PpStatus::PpNullArgument, "null output pointer");
        }
        let dir = match unsafe { path_arg(dir) } {
            Ok(p) => p,
            Err(s) => return s,
        };
        let files = match discover_sources(&[dir], false) {
            Ok(f) => f,
            Err(e) => return fail(PpStatus::PpIoError, &e.to_string()),
        };
        let set: BTreeSet<PairKey> = list.pairs.iter().cloned().collect();
        let report = check(&files, &set, &Default::default());
        unsafe { *out = Box::into_raw(Box::new(PpFindings { report })) };
        PpStatus::PpOk
    })
}

/// Number of findings (0 for null).
///
/// # Safety
/// `findings` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn pp_findings_len(findings: *const PpFindings) -> u64 {
    unsafe { findings.as_ref() }
        .map(|f| f.report.findings.len() as u64)
        .unwrap_or(0)
}

/// Number of unsafe findings (0 for null).
///
/// # Safety
/// `findings` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn pp_findings_unsafe_len(findings: *const PpFindings) -> u64 {
    unsafe { findings.as_ref() }
        .map(|f| f.report.unsafe_count() as u64)
        .unwrap_or(0)
}

/// Renders the text report into a newly allocated string; release it with
/// `pp_string_free`.
///
/// # Safety
/// `findings` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pp_findings_render_text(
    findings: *const PpFindings,
    out: *mut *mut c_char,
) -> PpStatus {
    guarded(|| {
        let Some(f) = (unsafe { findings.as_ref() }) else {
            return fail(PpStatus::PpNullArgument, "null findings");
        };
        if out.is_null() {
            return fail(PpStatus::PpNullArgument, "null output pointer");
        }
        let text = render_text_report(&f.report).replace('\0', " ");
        match CString::new(text) {
            Ok(c) => {
                unsafe { *out = c.into_raw() };
                PpStatus::PpOk
            }
            Err(_) => fail(PpStatus::PpInternalError, "report contains NUL"),
        }
    })
}

/// # Safety
/// `findings` must be null or an owned handle from this library; it is
/// freed.
#[no_mangle]
pub unsafe extern "C" fn pp_findings_free(findings: *mut PpFindings) {
    if !findings.is_null() {
        drop(unsafe { Box::from_raw(findings) });
    }
}

/// Frees a string previously returned by this library.
///
/// # Safety
/// `s` must be null or a pointer returned by `pp_findings_render_text`,
/// not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

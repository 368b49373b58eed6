#ifndef PROPLINT_H
#define PROPLINT_H

/* Generated by cbindgen from proplint-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code returned by every fallible entry point.
 */
typedef enum {
  PpOk = 0,
  PpNullArgument = 1,
  PpInvalidUtf8 = 2,
  PpIoError = 3,
  PpFormatError = 4,
  PpDomainError = 5,
  PpInvalidConfig = 6,
  PpInternalError = 7,
} PpStatus;

/**
 * Opaque aggregate of mined pair counts.
 */
typedef struct PpCountTable PpCountTable;

/**
 * Opaque checker findings.
 */
typedef struct PpFindings PpFindings;

/**
 * Opaque list of ⟨path, property⟩ pairs; entries render as
 * `path<TAB>prop`.
 */
typedef struct PpPairList PpPairList;

/**
 * Model thresholds plus the expected-usage support floor.
 */
typedef struct {
  double p_a;
  double p_prop;
  double p_ca;
  double p_cprop;
  uint64_t min_support;
} PpModelConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread. Borrowed; valid
 * until the next failing call on the same thread.
 */
const char *pp_last_error(void);

/**
 * Library version as a static string.
 */
const char *pp_version(void);

/**
 * P(X <= k) for X ~ Binomial(n, p), written to `out`.
 *
 * # Safety
 * `out` must point to writable memory for one f64.
 */
PpStatus pp_bcdf(uint64_t k, uint64_t n, double p, double *out);

/**
 * Loads a pair-count file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
PpStatus pp_table_load(const char *path, PpCountTable **out);

/**
 * Mines every JavaScript source below `dir` into a fresh count table.
 * Per-file parse failures are skipped, matching the CLI behavior.
 *
 * # Safety
 * `dir` must be a NUL-terminated string; `out` must be writable.
 */
PpStatus pp_table_mine_dir(const char *dir, PpCountTable **out);

/**
 * Writes a table in the pair-count file format.
 *
 * # Safety
 * `table` must come from this library and be live; `path` must be a
 * NUL-terminated string.
 */
PpStatus pp_table_save(const PpCountTable *table, const char *path);

/**
 * Adds `src` into `dst` pointwise.
 *
 * # Safety
 * Both handles must come from this library and be live.
 */
PpStatus pp_table_merge(PpCountTable *dst, const PpCountTable *src);

/**
 * Total observation count of a table (0 for null).
 *
 * # Safety
 * `table` must be null or a live handle from this library.
 */
uint64_t pp_table_total(const PpCountTable *table);

/**
 * Number of distinct pairs in a table (0 for null).
 *
 * # Safety
 * `table` must be null or a live handle from this library.
 */
uint64_t pp_table_unique_pairs(const PpCountTable *table);

/**
 * # Safety
 * `table` must be null or an owned handle from this library; it is freed.
 */
void pp_table_free(PpCountTable *table);

/**
 * Classifies a table and returns the anomalous pairs. Properties
 * inherited from Object.prototype are excluded, as in the CLI defaults.
 *
 * # Safety
 * `table` must be live; `config` may be null for the tuned defaults;
 * `out` must be writable.
 */
PpStatus pp_classify_anomalous(const PpCountTable *table,
                               const PpModelConfig *config,
                               PpPairList **out);

/**
 * Loads an anomalous-pair list file (`path<TAB>prop` rows).
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
PpStatus pp_pair_list_load(const char *path, PpPairList **out);

/**
 * Entry count of a pair list (0 for null).
 *
 * # Safety
 * `list` must be null or a live handle from this library.
 */
uint64_t pp_pair_list_len(const PpPairList *list);

/**
 * Entry at `index` as a `path<TAB>prop` string, borrowed from the list;
 * null when out of range.
 *
 * # Safety
 * `list` must be null or a live handle from this library.
 */
const char *pp_pair_list_get(const PpPairList *list, uint64_t index);

/**
 * # Safety
 * `list` must be null or an owned handle from this library; it is freed.
 */
void pp_pair_list_free(PpPairList *list);

/**
 * Checks every JavaScript source below `dir` against the anomalous pairs.
 *
 * # Safety
 * `dir` must be a NUL-terminated string; `anomalous` must be live; `out`
 * must be writable.
 */
PpStatus pp_check_dir(const char *dir, const PpPairList *anomalous, PpFindings **out);

/**
 * Number of findings (0 for null).
 *
 * # Safety
 * `findings` must be null or a live handle from this library.
 */
uint64_t pp_findings_len(const PpFindings *findings);

/**
 * Number of unsafe findings (0 for null).
 *
 * # Safety
 * `findings` must be null or a live handle from this library.
 */
uint64_t pp_findings_unsafe_len(const PpFindings *findings);

/**
 * Renders the text report into a newly allocated string; release it with
 * `pp_string_free`.
 *
 * # Safety
 * `findings` must be live; `out` must be writable.
 */
PpStatus pp_findings_render_text(const PpFindings *findings, char **out);

/**
 * # Safety
 * `findings` must be null or an owned handle from this library; it is
 * freed.
 */
void pp_findings_free(PpFindings *findings);

/**
 * Frees a string previously returned by this library.
 *
 * # Safety
 * `s` must be null or a pointer returned by `pp_findings_render_text`,
 * not yet freed.
 */
void pp_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PROPLINT_H */

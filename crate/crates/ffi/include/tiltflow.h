#ifndef TILTFLOW_H
#define TILTFLOW_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum TfStatus {
  TF_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  TF_STATUS_NULL_POINTER = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  TF_STATUS_INVALID_UTF8 = 2,
  /**
   * The measure spec could not be parsed or violates its invariants.
   */
  TF_STATUS_INVALID_MEASURE = 3,
  /**
   * Simulation options or an index are out of range.
   */
  TF_STATUS_INVALID_ARGUMENT = 4,
  /**
   * The tilt is not integrable, or the target lies outside the hull.
   */
  TF_STATUS_INVALID_TILT = 5,
  /**
   * A root solve or quadrature did not converge.
   */
  TF_STATUS_NUMERICAL = 6,
  /**
   * Every path of an ensemble failed.
   */
  TF_STATUS_ALL_PATHS_FAILED = 7,
  /**
   * A Rust panic was caught at the boundary.
   */
  TF_STATUS_PANIC = 8,
} TfStatus;

/**
 * Scheme selector for [`TfSimOptions`].
 */
typedef enum TfScheme {
  /**
   * `W` simulated directly, `c` recovered by root finding.
   */
  TF_SCHEME_ROOT_DRIVEN = 0,
  /**
   * Euler–Maruyama on `(b, c)`.
   */
  TF_SCHEME_EULER = 1,
} TfScheme;

typedef enum TfStopReason {
  TF_STOP_REASON_A_VAR_BELOW_EPS = 0,
  TF_STOP_REASON_HULL_ENDPOINT = 1,
  TF_STOP_REASON_TIME_LIMIT = 2,
  TF_STOP_REASON_BREAKDOWN = 3,
} TfStopReason;

/**
 * Opaque handle to the paths and summary of one ensemble run.
 */
typedef struct TfEnsemble TfEnsemble;

/**
 * Opaque measure handle.
 */
typedef struct TfMeasure TfMeasure;

/**
 * Tilted functionals at one `(b, c)`.
 */
typedef struct TfMoments {
  double v;
  double log_v;
  double a;
  double var;
  double m3;
} TfMoments;

/**
 * Ensemble options; fill with [`tf_sim_options_default`] and override.
 */
typedef struct TfSimOptions {
  double dt_max;
  double eta;
  double eps_a;
  double t_max;
  uint64_t seed;
  enum TfScheme scheme;
} TfSimOptions;

typedef struct TfPath {
  uint64_t path_id;
  double t_hat;
  double w_t;
  uint64_t n_steps;
  enum TfStopReason stop_reason;
} TfPath;

typedef struct TfSummary {
  size_t n;
  size_t n_failed;
  double mean_t;
  double se_t;
  double max_t;
  double ks_stat;
  double ks_p;
} TfSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *tf_version(void);

/**
 * Message of the last failed call on this thread, or "" after a success.
 * The pointer stays valid until the next call into the library on the
 * same thread.
 */
const char *tf_last_error_message(void);

/**
 * Parse a JSON measure spec, e.g. `{"type": "uniform", "lo": -1, "hi": 1}`.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` valid for writes.
 */
enum TfStatus tf_measure_from_json(const char *json, struct TfMeasure **out);

/**
 * Release a measure. Null is ignored.
 *
 * # Safety
 * `m` must come from [`tf_measure_from_json`] and not be used afterwards.
 */
void tf_measure_free(struct TfMeasure *m);

/**
 * Variance of the measure, or NaN for a null handle.
 *
 * # Safety
 * `m` must be null or a live handle.
 */
double tf_measure_variance(const struct TfMeasure *m);

/**
 * `V`, `log V`, `a`, `A` and `m3` of the measure tilted by `(b, c)`.
 *
 * # Safety
 * `m` must be a live handle and `out` valid for writes.
 */
enum TfStatus tf_tilted_moments(const struct TfMeasure *m,
                                double b,
                                double c,
                                struct TfMoments *out);

/**
 * The `c` at which the `b`-tilt of the measure has mean `a`.
 *
 * # Safety
 * `m` must be a live handle and `out` valid for writes.
 */
enum TfStatus tf_solve_c(const struct TfMeasure *m, double a, double b, double *out);

/**
 * Default options for the measure (`dt_max = 1e-3`, `eta = 0.05`,
 * `eps_a = 1e-6·Var`, `t_max = 50·Var`, seed 0, root-driven scheme).
 *
 * # Safety
 * `m` must be a live handle and `out` valid for writes.
 */
enum TfStatus tf_sim_options_default(const struct TfMeasure *m, struct TfSimOptions *out);

/**
 * Simulate paths `0..n_paths` and summarize them.
 *
 * # Safety
 * `m` and `opts` must be valid; `out` valid for writes.
 */
enum TfStatus tf_run_ensemble(const struct TfMeasure *m,
                              const struct TfSimOptions *opts,
                              size_t n_paths,
                              struct TfEnsemble **out);

/**
 * Number of paths in the ensemble, or 0 for a null handle.
 *
 * # Safety
 * `e` must be null or a live handle.
 */
size_t tf_ensemble_len(const struct TfEnsemble *e);

/**
 * Per-path outcome `i`.
 *
 * # Safety
 * `e` must be a live handle and `out` valid for writes.
 */
enum TfStatus tf_ensemble_path(const struct TfEnsemble *e, size_t i, struct TfPath *out);

/**
 * Aggregate statistics of the ensemble.
 *
 * # Safety
 * `e` must be a live handle and `out` valid for writes.
 */
enum TfStatus tf_ensemble_summary(const struct TfEnsemble *e, struct TfSummary *out);

/**
 * Release an ensemble. Null is ignored.
 *
 * # Safety
 * `e` must come from [`tf_run_ensemble`] and not be used afterwards.
 */
void tf_ensemble_free(struct TfEnsemble *e);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TILTFLOW_H */

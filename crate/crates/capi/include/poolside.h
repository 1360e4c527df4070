#ifndef POOLSIDE_H
#define POOLSIDE_H

/* Generated by cbindgen from the poolside-capi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code returned by every fallible function.
 */
typedef enum {
  POOLSIDE_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  POOLSIDE_STATUS_NULL_ARGUMENT = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  POOLSIDE_STATUS_INVALID_UTF8 = 2,
  /**
   * The experiment spec failed to parse or validate.
   */
  POOLSIDE_STATUS_INVALID_SPEC = 3,
  /**
   * A numeric argument was out of range (sizes, probabilities).
   */
  POOLSIDE_STATUS_INVALID_ARGUMENT = 4,
  /**
   * The experiment or serialization failed at runtime.
   */
  POOLSIDE_STATUS_RUNTIME_ERROR = 5,
} PoolsideStatus;

/**
 * Classification score selector for [`poolside_score_classification`].
 */
typedef enum {
  POOLSIDE_CLASS_MEASURE_ENTROPY = 0,
  POOLSIDE_CLASS_MEASURE_LEAST_CONFIDENCE = 1,
  POOLSIDE_CLASS_MEASURE_MARGIN_CONFIDENCE = 2,
  POOLSIDE_CLASS_MEASURE_RATIO_CONFIDENCE = 3,
} PoolsideClassMeasure;

/**
 * Regression score selector for [`poolside_score_regression`]. `Ucb` reads
 * its trade-off lambda and `ExpectedImprovement` the best observed target
 * from the `param` argument; the other measures ignore it.
 */
typedef enum {
  POOLSIDE_REGRESSION_MEASURE_LEAST_CONFIDENCE = 0,
  POOLSIDE_REGRESSION_MEASURE_GREEDY_SCORE = 1,
  POOLSIDE_REGRESSION_MEASURE_UCB = 2,
  POOLSIDE_REGRESSION_MEASURE_EXPECTED_IMPROVEMENT = 3,
  POOLSIDE_REGRESSION_MEASURE_BALD = 4,
} PoolsideRegressionMeasure;

/**
 * Opaque handle to a finished experiment sweep.
 */
typedef struct PoolsideExperiment PoolsideExperiment;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static string; do not free.
 */
const char *poolside_version(void);

/**
 * Message of the last error on this thread, or null if the last call
 * succeeded. Borrowed pointer, valid until the next failing call on the
 * same thread; do not free.
 */
const char *poolside_last_error(void);

/**
 * Frees a string returned by this library.
 *
 * # Safety
 * `s` must be a pointer previously returned by a `poolside_*` function
 * that documents string ownership, or null.
 */
void poolside_string_free(char *s);

/**
 * Runs an experiment from a JSON spec string.
 *
 * `seed_override` may be null; when set it replaces the spec's master
 * seed. On success `*out` owns the experiment handle, to be released with
 * [`poolside_experiment_free`].
 *
 * # Safety
 * `spec_json` must be a valid NUL-terminated string and `out` a valid
 * pointer; `seed_override` is either null or a valid pointer.
 */
PoolsideStatus poolside_experiment_run(const char *spec_json,
                                       const uint64_t *seed_override,
                                       PoolsideExperiment **out);

/**
 * Releases an experiment handle.
 *
 * # Safety
 * `exp` must come from [`poolside_experiment_run`] or be null.
 */
void poolside_experiment_free(PoolsideExperiment *exp);

/**
 * Number of strategy entries in the sweep.
 *
 * # Safety
 * `exp` must be a valid experiment handle.
 */
uintptr_t poolside_experiment_strategy_count(const PoolsideExperiment *exp);

/**
 * Mean and standard deviation of a strategy's IPAUC over folds.
 *
 * # Safety
 * `exp` must be a valid experiment handle; `mean_out` and `std_out` must
 * be valid pointers.
 */
PoolsideStatus poolside_experiment_ipauc(const PoolsideExperiment *exp,
                                         uintptr_t strategy_index,
                                         double *mean_out,
                                         double *std_out);

/**
 * Name of a strategy entry; caller frees with [`poolside_string_free`].
 * Returns null on a bad index.
 *
 * # Safety
 * `exp` must be a valid experiment handle.
 */
char *poolside_experiment_strategy_name(const PoolsideExperiment *exp, uintptr_t strategy_index);

/**
 * The `summary.csv` content; caller frees with [`poolside_string_free`].
 *
 * # Safety
 * `exp` must be a valid experiment handle.
 */
char *poolside_experiment_summary_csv(const PoolsideExperiment *exp);

/**
 * Writes `summary.csv`, `runs.jsonl`, and `spec.json` into `out_dir`.
 *
 * # Safety
 * `exp` must be a valid experiment handle and `out_dir` a valid
 * NUL-terminated path.
 */
PoolsideStatus poolside_experiment_write(const PoolsideExperiment *exp, const char *out_dir);

/**
 * Scores a row-major `n_points x n_classes` probability matrix with a
 * classification measure, writing `n_points` scores to `out_scores`.
 *
 * # Safety
 * `probs` must point to `n_points * n_classes` doubles and `out_scores`
 * to `n_points` doubles.
 */
PoolsideStatus poolside_score_classification(PoolsideClassMeasure measure,
                                             const double *probs,
                                             uintptr_t n_points,
                                             uintptr_t n_classes,
                                             double *out_scores);

/**
 * Scores `n_points` Gaussian predictive marginals with a regression
 * measure. `param` is the UCB lambda or the expected-improvement
 * reference, depending on the measure.
 *
 * # Safety
 * `mean`, `variance`, and `out_scores` must each point to `n_points`
 * doubles.
 */
PoolsideStatus poolside_score_regression(PoolsideRegressionMeasure measure,
                                         const double *mean,
                                         const double *variance,
                                         uintptr_t n_points,
                                         double param,
                                         double *out_scores);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* POOLSIDE_H */

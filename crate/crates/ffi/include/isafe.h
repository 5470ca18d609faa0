#ifndef ISAFE_H
#define ISAFE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum IsafeMetricKind {
  ISAFE_METRIC_KIND_QBM = 0,
  ISAFE_METRIC_KIND_WCM = 1,
  ISAFE_METRIC_KIND_TI_WCM = 2,
} IsafeMetricKind;

typedef enum IsafeStatus {
  ISAFE_STATUS_OK = 0,
  ISAFE_STATUS_NULL_POINTER = 1,
  /**
   * Invalid input or configuration.
   */
  ISAFE_STATUS_VALIDATION = 2,
  /**
   * A scoring adapter failed.
   */
  ISAFE_STATUS_ADAPTER = 3,
  ISAFE_STATUS_IO = 4,
  /**
   * A Rust panic was caught at the boundary.
   */
  ISAFE_STATUS_INTERNAL = 5,
} IsafeStatus;

/**
 * Index-aligned original and perturbed scores.
 */
typedef struct IsafeProfile IsafeProfile;

typedef struct IsafeMetricValue {
  double value;
  /**
   * Zero paired displacement; `value` is 0 by convention.
   */
  bool degenerate;
} IsafeMetricValue;

typedef struct IsafeDiagnostics {
  double mean_original;
  double mean_perturbed;
  double paired_rms;
  double transport_rms;
  size_t n;
} IsafeDiagnostics;

typedef struct IsafeInterval {
  double point;
  double lower;
  double upper;
} IsafeInterval;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. The pointer
 * stays valid until the next call into this library on the same thread.
 */
const char *isafe_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *isafe_version(void);

/**
 * Copies `n` score pairs into a new profile written to `*out`.
 *
 * # Safety
 * `original` and `perturbed` must point to `n` readable doubles and `out`
 * to writable storage for one pointer.
 */
enum IsafeStatus isafe_profile_new(const double *original,
                                   const double *perturbed,
                                   size_t n,
                                   struct IsafeProfile **out);

/**
 * Releases a profile. NULL is ignored.
 *
 * # Safety
 * `profile` must come from `isafe_profile_new` and not be used afterwards.
 */
void isafe_profile_free(struct IsafeProfile *profile);

/**
 * Number of pairs in `profile`, or 0 for NULL.
 *
 * # Safety
 * `profile` must be NULL or a live handle.
 */
size_t isafe_profile_len(const struct IsafeProfile *profile);

/**
 * Evaluates one metric. `levels` is the QBM grid (ignored for WCM and
 * TI-WCM); pass NULL and 0 for the quartiles.
 *
 * # Safety
 * `profile` must be a live handle, `levels` must point to `n_levels`
 * doubles when non-NULL, and `out` must be writable.
 */
enum IsafeStatus isafe_metric(const struct IsafeProfile *profile,
                              enum IsafeMetricKind kind,
                              const double *levels,
                              size_t n_levels,
                              struct IsafeMetricValue *out);

/**
 * # Safety
 * `profile` must be a live handle and `out` writable.
 */
enum IsafeStatus isafe_diagnostics(const struct IsafeProfile *profile,
                                   struct IsafeDiagnostics *out);

/**
 * Spurious-minus-mechanistic contrast of one metric.
 *
 * # Safety
 * Both profiles must be live handles, `levels` as in `isafe_metric`, and
 * `delta` writable.
 */
enum IsafeStatus isafe_contrast(const struct IsafeProfile *mechanistic,
                                const struct IsafeProfile *spurious,
                                enum IsafeMetricKind kind,
                                const double *levels,
                                size_t n_levels,
                                double *delta);

/**
 * Percentile bootstrap interval for one metric, resampling pairs.
 *
 * # Safety
 * As for `isafe_metric`.
 */
enum IsafeStatus isafe_bootstrap_metric(const struct IsafeProfile *profile,
                                        enum IsafeMetricKind kind,
                                        const double *levels,
                                        size_t n_levels,
                                        size_t replicates,
                                        double confidence,
                                        uint64_t boot_seed,
                                        struct IsafeInterval *out);

/**
 * Type-7 empirical quantile of `n` values at `level` in [0, 1].
 *
 * # Safety
 * `values` must point to `n` doubles and `out` be writable.
 */
enum IsafeStatus isafe_empirical_quantile(const double *values,
                                          size_t n,
                                          double level,
                                          double *out);

/**
 * AUROC with half credit for ties. Labels must be 0 or 1.
 *
 * # Safety
 * `scores` and `labels` must point to `n` elements and `out` be writable.
 */
enum IsafeStatus isafe_auroc(const double *scores, const uint8_t *labels, size_t n, double *out);

/**
 * Loads a TOML audit config, runs it, and writes the report files to
 * `out_dir`.
 *
 * # Safety
 * Both arguments must be NUL-terminated UTF-8 strings.
 */
enum IsafeStatus isafe_run_audit(const char *config_path, const char *out_dir);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ISAFE_H */

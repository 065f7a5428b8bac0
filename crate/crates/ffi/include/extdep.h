#ifndef EXTDEP_H
#define EXTDEP_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ExtdepStatus {
  EXTDEP_STATUS_OK = 0,
  EXTDEP_STATUS_NULL_POINTER = 1,
  /**
   * Invalid input: bad indices, shapes, parameters or JSON.
   */
  EXTDEP_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Numerically degenerate data or no exact value available.
   */
  EXTDEP_STATUS_NUMERIC = 3,
  /**
   * Output buffer too small.
   */
  EXTDEP_STATUS_BUFFER_TOO_SMALL = 4,
  /**
   * A Rust panic was caught at the boundary.
   */
  EXTDEP_STATUS_PANIC = 5,
} ExtdepStatus;

/**
 * How raw observations are mapped to (0, 1).
 */
typedef enum ExtdepMargins {
  /**
   * Ranks / (n + 1).
   */
  EXTDEP_MARGINS_RANKS = 0,
  EXTDEP_MARGINS_UNIT_FRECHET = 1,
  EXTDEP_MARGINS_UNIFORM = 2,
  EXTDEP_MARGINS_STD_NORMAL = 3,
} ExtdepMargins;

typedef enum ExtdepProvenance {
  EXTDEP_PROVENANCE_KNOWN_MARGINS = 0,
  EXTDEP_PROVENANCE_EMPIRICAL_RANKS = 1,
} ExtdepProvenance;

/**
 * A validated model specification.
 */
typedef struct ExtdepModel ExtdepModel;

/**
 * Pseudo-observations in (0, 1).
 */
typedef struct ExtdepSample ExtdepSample;

typedef struct ExtdepFunctionals {
  double eps_i1;
  double eps_i2;
  double eps_union;
  double eps_pair;
} ExtdepFunctionals;

typedef struct ExtdepEstimate {
  double value;
  double std_error;
  double ci_low;
  double ci_high;
  double level;
  size_t n;
  enum ExtdepProvenance provenance;
  /**
   * True when the standard error ignores margin estimation.
   */
  bool se_approximate;
} ExtdepEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty after a success.
 * Valid until the next call on the same thread.
 */
const char *extdep_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *extdep_version(void);

/**
 * Builds a sample from `n * d` row-major observations.
 *
 * # Safety
 * `data` must point to `n * d` readable doubles and `out` to a writable handle slot.
 */
enum ExtdepStatus extdep_sample_from_raw(const double *data,
                                         size_t n,
                                         size_t d,
                                         enum ExtdepMargins margins,
                                         struct ExtdepSample **out);

/**
 * Builds a sample from pseudo-observations already in (0, 1).
 *
 * # Safety
 * As for [`extdep_sample_from_raw`].
 */
enum ExtdepStatus extdep_sample_from_pseudo(const double *data,
                                            size_t n,
                                            size_t d,
                                            enum ExtdepProvenance provenance,
                                            struct ExtdepSample **out);

/**
 * # Safety
 * `sample` must be null or a handle from this library not yet freed.
 */
void extdep_sample_free(struct ExtdepSample *sample);

/**
 * # Safety
 * `sample` must be a live handle; `n` and `d` writable (either may be null).
 */
enum ExtdepStatus extdep_sample_shape(const struct ExtdepSample *sample, size_t *n, size_t *d);

/**
 * Parses a JSON model spec, e.g. `{"type":"logistic","theta":0.5,"d":4}`.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a writable handle slot.
 */
enum ExtdepStatus extdep_model_from_json(const char *json, struct ExtdepModel **out);

/**
 * # Safety
 * `model` must be null or a handle from this library not yet freed.
 */
void extdep_model_free(struct ExtdepModel *model);

/**
 * # Safety
 * `model` must be a live handle and `d` writable.
 */
enum ExtdepStatus extdep_model_dim(const struct ExtdepModel *model, size_t *d);

/**
 * Exact extremal coefficients of the model for the pair (I1, I2).
 *
 * # Safety
 * Index arrays must hold `n1` / `n2` entries; `out` must be writable.
 */
enum ExtdepStatus extdep_model_functionals(const struct ExtdepModel *model,
                                           const size_t *i1,
                                           size_t n1,
                                           const size_t *i2,
                                           size_t n2,
                                           struct ExtdepFunctionals *out);

/**
 * Exact upper-tail dependence function Lambda_U(x, y).
 *
 * # Safety
 * As for [`extdep_model_functionals`].
 */
enum ExtdepStatus extdep_model_lambda(const struct ExtdepModel *model,
                                      const size_t *i1,
                                      size_t n1,
                                      const size_t *i2,
                                      size_t n2,
                                      double x,
                                      double y,
                                      double *out);

/**
 * Simulates `n` rows into `buf` (row-major, `n * d` doubles, model margins).
 *
 * # Safety
 * `buf` must have room for `buf_len` doubles.
 */
enum ExtdepStatus extdep_simulate(const struct ExtdepModel *model,
                                  size_t n,
                                  uint64_t seed,
                                  uint64_t stream,
                                  double *buf,
                                  size_t buf_len);

/**
 * Estimate of eps_(I1,I2) = eps_I1 + eps_I2 - eps_(I1 u I2).
 *
 * # Safety
 * Index arrays must hold `n1` / `n2` entries; `out` must be writable.
 */
enum ExtdepStatus extdep_estimate_eps_pair(const struct ExtdepSample *sample,
                                           const size_t *i1,
                                           size_t n1,
                                           const size_t *i2,
                                           size_t n2,
                                           double level,
                                           struct ExtdepEstimate *out);

/**
 * Estimate of Lambda_U(x, y).
 *
 * # Safety
 * As for [`extdep_estimate_eps_pair`].
 */
enum ExtdepStatus extdep_estimate_lambda(const struct ExtdepSample *sample,
                                         const size_t *i1,
                                         size_t n1,
                                         const size_t *i2,
                                         size_t n2,
                                         double x,
                                         double y,
                                         double level,
                                         struct ExtdepEstimate *out);

/**
 * Estimate of l^(I1,I2)(1/x, 1/y).
 *
 * # Safety
 * As for [`extdep_estimate_eps_pair`].
 */
enum ExtdepStatus extdep_estimate_l_pair(const struct ExtdepSample *sample,
                                         const size_t *i1,
                                         size_t n1,
                                         const size_t *i2,
                                         size_t n2,
                                         double x,
                                         double y,
                                         double level,
                                         struct ExtdepEstimate *out);

/**
 * Estimate of x * eps_I for a one-based column set.
 *
 * # Safety
 * `set` must hold `len` entries; `out` must be writable.
 */
enum ExtdepStatus extdep_estimate_eps_scaled(const struct ExtdepSample *sample,
                                             const size_t *set,
                                             size_t len,
                                             double x,
                                             double level,
                                             struct ExtdepEstimate *out);

/**
 * Estimate of -log F(x_1, ..., x_d); `x_j = INFINITY` drops column j.
 *
 * # Safety
 * `x` must hold `len` doubles; `out` must be writable.
 */
enum ExtdepStatus extdep_estimate_stdf(const struct ExtdepSample *sample,
                                       const double *x,
                                       size_t len,
                                       double level,
                                       struct ExtdepEstimate *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EXTDEP_H */

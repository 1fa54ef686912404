#ifndef SPECDENS_H
#define SPECDENS_H

/* Generated by cbindgen from crates/ffi. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SdInterval {
  SD_INTERVAL_FULL = 0,
  SD_INTERVAL_HALF = 1,
} SdInterval;

typedef enum SdMethod {
  SD_METHOD_FEJER = 0,
  SD_METHOD_QUBITIZED_FEJER = 1,
  SD_METHOD_GIT = 2,
} SdMethod;

typedef enum SdStatus {
  SD_STATUS_OK = 0,
  SD_STATUS_VALIDATION = 2,
  SD_STATUS_OUT_OF_REGIME = 3,
  SD_STATUS_RESOURCE_CAP = 4,
  SD_STATUS_IO = 5,
  SD_STATUS_NUMERIC = 6,
  SD_STATUS_NULL_POINTER = 7,
  SD_STATUS_PANIC = 8,
} SdStatus;

/**
 * Operator, probe state and their spectral model.
 */
typedef struct SdModel SdModel;

/**
 * Output of one estimator run.
 */
typedef struct SdResult SdResult;

/**
 * Accuracy target `(Sigma, Delta, beta, eta)`.
 */
typedef struct SdTarget {
  double sigma;
  double delta;
  double beta;
  double eta;
} SdTarget;

/**
 * GIT truncation plan.
 */
typedef struct SdGitPlan {
  double lambda;
  /**
   * Order from the closed-form truncation formula.
   */
  uint64_t formula_order;
  /**
   * Order used by the estimator (bound certified at `beta/2`).
   */
  uint64_t order;
  /**
   * 1 for the asymptotic regime, 0 for the intermediate one.
   */
  int32_t asymptotic;
  double r_l_bound;
} SdGitPlan;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *sd_version(void);

/**
 * Copies the calling thread's last error message into `buf` (NUL-terminated,
 * truncated to `cap`). Returns the full message length without the NUL.
 *
 * # Safety
 * `buf` must be null or valid for `cap` bytes.
 */
size_t sd_last_error_message(char *buf, size_t cap);

/**
 * Diagonal model: eigenvalues `omegas` with weights `weights` (probe amplitudes
 * `sqrt(weight)`). Weights must be nonnegative and sum to one.
 *
 * # Safety
 * `omegas` and `weights` must be valid for `len` reads; `out` must be writable.
 */
enum SdStatus sd_model_from_spectrum(const double *omegas,
                                     const double *weights,
                                     size_t len,
                                     struct SdModel **out);

/**
 * Random instance from a generator spec (`dense`, `spiked`, `gapped:<d>:<e>`, optional `@radius`).
 *
 * # Safety
 * `spec` must be a NUL-terminated string; `out` must be writable.
 */
enum SdStatus sd_model_generate(size_t dim, uint64_t seed, const char *spec, struct SdModel **out);

/**
 * Model from operator text (`dim n`, matrix rows, `psi` block).
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be writable.
 */
enum SdStatus sd_model_from_text(const char *text, struct SdModel **out);

/**
 * Rescales the operator onto `interval` in place; reports the affine map.
 *
 * # Safety
 * `model` must be a live handle; `scale` and `shift` may be null.
 */
enum SdStatus sd_model_normalize(struct SdModel *model,
                                 enum SdInterval interval,
                                 double *scale,
                                 double *shift);

/**
 * # Safety
 * `model` must be a live handle or null.
 */
size_t sd_model_dim(const struct SdModel *model);

/**
 * # Safety
 * `model` must be null or a handle not yet freed.
 */
void sd_model_free(struct SdModel *model);

/**
 * Fejer order `N` and sample count `N_S` for a target.
 *
 * # Safety
 * `t` must be readable; `n` and `n_s` writable.
 */
enum SdStatus sd_plan_fejer(const struct SdTarget *t, uint64_t *n, uint64_t *n_s);

/**
 * # Safety
 * `t` must be readable; `out` writable.
 */
enum SdStatus sd_plan_git(const struct SdTarget *t, struct SdGitPlan *out);

/**
 * Planned Fejer-type run (Algorithm 1) on the model's spectral distribution.
 * `n_s = 0` keeps the planned sample count.
 *
 * # Safety
 * `model` and `t` must be live/readable; `out` writable.
 */
enum SdStatus sd_estimate_fejer(const struct SdModel *model,
                                enum SdMethod m,
                                const struct SdTarget *t,
                                uint64_t n_s,
                                uint64_t seed,
                                struct SdResult **out);

/**
 * Gaussian-transform run (Algorithm 2) at the frequencies `nu`.
 * `shots_per_order = 0` uses the planned shots; `exact != 0` skips shot noise.
 * The operator spectrum must already lie in `[-1/2, 1/2]`.
 *
 * # Safety
 * `model` and `t` must be live/readable; `nu` valid for `n_nu` reads; `out` writable.
 */
enum SdStatus sd_estimate_git(const struct SdModel *model,
                              const struct SdTarget *t,
                              const double *nu,
                              size_t n_nu,
                              uint64_t shots_per_order,
                              int32_t exact,
                              uint64_t seed,
                              struct SdResult **out);

/**
 * Number of `(nu, value)` points.
 *
 * # Safety
 * `r` must be a live handle or null.
 */
size_t sd_result_len(const struct SdResult *r);

/**
 * Total samples spent by the run.
 *
 * # Safety
 * `r` must be a live handle or null.
 */
uint64_t sd_result_samples(const struct SdResult *r);

/**
 * Copies up to `cap` points into `nu` and `values`.
 *
 * # Safety
 * `r` must be live; `nu` and `values` writable for `cap` elements.
 */
enum SdStatus sd_result_copy(const struct SdResult *r, double *nu, double *values, size_t cap);

/**
 * # Safety
 * `r` must be null or a handle not yet freed.
 */
void sd_result_free(struct SdResult *r);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPECDENS_H */

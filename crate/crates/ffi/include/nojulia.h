#ifndef NOJULIA_H
#define NOJULIA_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum NjStatus {
  NJ_STATUS_OK = 0,
  NJ_STATUS_NULL_POINTER = 1,
  NJ_STATUS_INVALID_ARGUMENT = 2,
  NJ_STATUS_CERTIFICATE_NOT_FOUND = 3,
  NJ_STATUS_RADIUS_ON_SINGULARITY = 4,
  NJ_STATUS_QUADRATURE_CAP = 5,
  NJ_STATUS_INSUFFICIENT_SPAN = 6,
  NJ_STATUS_PANIC = 99,
} NjStatus;

/**
 * Opaque construction handle.
 */
typedef struct NjConstruction NjConstruction;

typedef struct NjConstructionInfo {
  double lambda;
  double p;
  uint64_t n0;
  uint64_t start;
} NjConstructionInfo;

/**
 * Level disk geometry; ratios are relative to `alpha = exp(log_alpha)`.
 */
typedef struct NjLevelDisk {
  double log_alpha;
  double level;
  double center_ratio;
  double radius_ratio;
  double near_ratio;
  double far_ratio;
  double sector_half_angle;
} NjLevelDisk;

/**
 * `f(z)` as `log|f|` and `arg f`. `log_abs_f` is `-inf` at a zero and `+inf`
 * at a pole. `nearest_index` is 0 when no zero or pole lies within
 * log-polar distance 1; `nearest_kind` is then 0, else 1 (zero) or 2 (pole).
 */
typedef struct NjEvalResult {
  double log_abs_f;
  double arg_f;
  uint64_t truncation_index;
  double tail_bound;
  uint32_t nearest_kind;
  uint64_t nearest_index;
  double nearest_log_distance;
} NjEvalResult;

typedef struct NjCharacteristicSample {
  double log_r;
  double m_f;
  double n_poles;
  double m_inv;
  double n_zeros;
  double t;
  double jensen_residual;
} NjCharacteristicSample;

/**
 * `tail_ratio` is NaN when undefined.
 */
typedef struct NjOrderFit {
  double lambda_hat;
  double intercept;
  double window_lo;
  double window_hi;
  double max_residual;
  uint64_t sample_count;
  double tail_ratio;
} NjOrderFit;

/**
 * `regime` is 1 for the small-disk sector, 2 for the exterior sector.
 */
typedef struct NjDirectionSummary {
  double theta;
  double epsilon;
  uint32_t regime;
  double log_bound;
  double log_min_abs_f;
  double log_max_abs_f;
  uint64_t samples;
  uint64_t skipped_near_singular;
  uint64_t exceptional_hits;
  uint64_t violations;
} NjDirectionSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Builds the construction for `lambda` in (1, 2).
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum NjStatus nj_construction_new(double lambda, struct NjConstruction **out);

/**
 * # Safety
 * `handle` must be null or come from [`nj_construction_new`] and not have
 * been freed.
 */
void nj_construction_free(struct NjConstruction *handle);

/**
 * # Safety
 * `c` must be a live handle or null; `out` must be null or valid for writes.
 */
enum NjStatus nj_construction_info(const struct NjConstruction *c, struct NjConstructionInfo *out);

/**
 * `I_n = n(n+2)/(n+1)^2` for `n >= 1`.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum NjStatus nj_level_schedule(uint64_t n, double *out);

/**
 * # Safety
 * `out` must be null or valid for writes.
 */
enum NjStatus nj_level_disk(double log_alpha, double level, struct NjLevelDisk *out);

/**
 * Margin by which the disks of index `n` and `n + 1` are separated.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum NjStatus nj_disjointness_margin(uint64_t n, double lambda, double *out);

/**
 * Evaluates `f` at `exp(log_abs_z + i arg_z)`.
 *
 * # Safety
 * `c` must be a live handle or null; `out` must be null or valid for writes.
 */
enum NjStatus nj_evaluate(const struct NjConstruction *c,
                          double log_abs_z,
                          double arg_z,
                          double eps,
                          struct NjEvalResult *out);

/**
 * # Safety
 * `c` must be a live handle or null; `out` must be null or valid for writes.
 */
enum NjStatus nj_characteristic(const struct NjConstruction *c,
                                double log_r,
                                double quad_tol,
                                struct NjCharacteristicSample *out);

/**
 * Least-squares fit of `log T` against `log log r` over `len` samples.
 *
 * # Safety
 * `log_r` and `t` must be null or point to `len` readable doubles; `out`
 * must be null or valid for writes.
 */
enum NjStatus nj_log_order_fit(const double *log_r,
                               const double *t,
                               size_t len,
                               struct NjOrderFit *out);

/**
 * Samples the sector around `theta` on `n_radii` radii up to `log_r_max`.
 *
 * # Safety
 * `c` must be a live handle or null; `out` must be null or valid for writes.
 */
enum NjStatus nj_scan_direction(const struct NjConstruction *c,
                                double theta,
                                size_t n_radii,
                                double log_r_max,
                                uint64_t seed,
                                struct NjDirectionSummary *out);

/**
 * Copies the calling thread's last error message into `buf` (NUL
 * terminated, truncated to `len`) and returns the full length including the
 * terminator. Pass a null `buf` to query the length.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes of writes.
 */
size_t nj_last_error_message(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *nj_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NOJULIA_H */

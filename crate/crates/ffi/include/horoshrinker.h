#ifndef HOROSHRINKER_H
#define HOROSHRINKER_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Column selector for [`hs_curve_copy_column`].
 */
typedef enum {
  /**
   * Arc length, or the radius for bowls.
   */
  HS_COLUMN_PARAMETER = 0,
  HS_COLUMN_X = 1,
  HS_COLUMN_Z = 2,
  HS_COLUMN_THETA = 3,
} HsColumn;

typedef enum {
  HS_FAMILY_GRIM = 0,
  HS_FAMILY_BOWL = 1,
  HS_FAMILY_WING = 2,
} HsFamily;

typedef enum {
  HS_STATUS_OK = 0,
  HS_STATUS_NULL_POINTER = 1,
  /**
   * An input lies outside the domain of the operation.
   */
  HS_STATUS_DOMAIN = 2,
  HS_STATUS_PRECONDITION = 3,
  HS_STATUS_INVALID_CONFIG = 4,
  /**
   * Solver or root-finding failure.
   */
  HS_STATUS_NUMERICAL = 5,
  HS_STATUS_INDEX_OUT_OF_RANGE = 6,
  /**
   * The integration finished early; the handle holds a partial curve.
   */
  HS_STATUS_INCOMPLETE = 7,
  HS_STATUS_PANIC = 8,
} HsStatus;

/**
 * A sampled generating curve.
 */
typedef struct HsCurve HsCurve;

typedef struct {
  double rtol;
  double atol;
  double event_tol;
  uint64_t max_steps;
} HsSolverConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Default tolerances: rtol 1e-10, atol 1e-12, event_tol 1e-12.
 */
HsSolverConfig hs_solver_config_default(void);

/**
 * Grim reaper through `(z0, θ = 0)` over `s ∈ [-s_max, s_max]`. `cfg` may be null.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle; `cfg` is null or valid.
 */
HsStatus hs_grim_new(double z0, double s_max, const HsSolverConfig *cfg, HsCurve **out);

/**
 * Bowl through `(0, z0)` sampled on `r ∈ [0, r_max]`.
 *
 * # Safety
 * As for [`hs_grim_new`].
 */
HsStatus hs_bowl_new(double z0, double r_max, const HsSolverConfig *cfg, HsCurve **out);

/**
 * Wing with waist `(x0, z0)` over `s ∈ [-s_max, s_max]`.
 *
 * # Safety
 * As for [`hs_grim_new`].
 */
HsStatus hs_wing_new(double x0, double z0, double s_max, const HsSolverConfig *cfg, HsCurve **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `curve` must be null or a handle returned by this library that was not freed yet.
 */
void hs_curve_free(HsCurve *curve);

/**
 * Number of samples; 0 for a null handle.
 *
 * # Safety
 * `curve` must be null or a live handle.
 */
size_t hs_curve_len(const HsCurve *curve);

/**
 * # Safety
 * `curve` must be a live handle and `family` writable.
 */
HsStatus hs_curve_family(const HsCurve *curve, HsFamily *family);

/**
 * [`HsStatus::Ok`] when the integration behind the handle completed, else [`HsStatus::Incomplete`].
 *
 * # Safety
 * `curve` must be null or a live handle.
 */
HsStatus hs_curve_status(const HsCurve *curve);

/**
 * Writes sample `index` into the non-null output pointers; null outputs are skipped.
 *
 * # Safety
 * `curve` must be a live handle; each output pointer is null or writable.
 */
HsStatus hs_curve_sample(const HsCurve *curve,
                         size_t index,
                         double *t,
                         double *x,
                         double *z,
                         double *theta);

/**
 * Copies one column into `buf`, which must hold at least `hs_curve_len` values.
 *
 * # Safety
 * `curve` must be a live handle and `buf` valid for `len` writes.
 */
HsStatus hs_curve_copy_column(const HsCurve *curve, HsColumn column, double *buf, size_t len);

/**
 * Maximum and RMS of the finite-difference horo-shrinker residual.
 *
 * # Safety
 * `curve` must be a live handle; `max` and `rms` are null or writable.
 */
HsStatus hs_curve_residual(const HsCurve *curve, double *max, double *rms);

/**
 * `cos θ / (z² e^{2/z})`.
 *
 * # Safety
 * `out` must be writable.
 */
HsStatus hs_first_integral(double z, double theta, double *out);

/**
 * Maximum height `z0*` of the grim reaper with minimum `z0 ∈ (0, 1)`.
 *
 * # Safety
 * `out` must be writable; `cfg` is null or valid.
 */
HsStatus hs_z0_star(double z0, const HsSolverConfig *cfg, double *out);

/**
 * Message of the last failure on this thread, or null. Valid until the next failing call.
 */
const char *hs_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *hs_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HOROSHRINKER_H */

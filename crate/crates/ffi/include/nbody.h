#ifndef NBODY_FFI_H
#define NBODY_FFI_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define NB_PRECISION_SINGLE 0

#define NB_PRECISION_DOUBLE 1

#define NB_LAYOUT_AOS 0

#define NB_LAYOUT_SOA 1

#define NB_MATH_POW_THEN_DIVIDE 0

#define NB_MATH_RECIPROCAL_MULTIPLY 1

typedef enum NbStatus {
  NB_STATUS_OK = 0,
  NB_STATUS_INVALID_ARGUMENT = 1,
  NB_STATUS_INVALID_VARIANT = 2,
  NB_STATUS_LAYOUT_MISMATCH = 3,
  NB_STATUS_NULL_POINTER = 4,
  NB_STATUS_IO = 5,
  NB_STATUS_PARSE = 6,
  NB_STATUS_PANIC = 7,
} NbStatus;

/**
 * Opaque particle system handle.
 */
typedef struct NbSystem NbSystem;

/**
 * Physics constants; mirrors the Rust `SimParams`.
 */
typedef struct NbParams {
  double gravitational_constant;
  double dt;
  double softening_sq;
  uint64_t steps;
} NbParams;

/**
 * Kernel variant. `block` 0 means unblocked.
 */
typedef struct NbVariant {
  int32_t layout;
  int32_t math_form;
  uint64_t block;
  uint64_t threads;
} NbVariant;

/**
 * Summary of one `nb_measure` call. `status_ok` is 0 when the final
 * checksum was non-finite.
 */
typedef struct NbBenchSummary {
  double best_time_s;
  double mean_time_s;
  double gflops_best;
  double gflops_mean;
  double checksum;
  int32_t status_ok;
} NbBenchSummary;

/**
 * Outcome of `nb_cross_validate` for one variant.
 */
typedef struct NbValidation {
  double checksum;
  double reference_checksum;
  double checksum_deviation;
  double tolerance;
  int32_t passed;
} NbValidation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *nb_version(void);

/**
 * Message for the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next `nb_*` call on the same thread.
 */
const char *nb_last_error_message(void);

/**
 * G = 1, dt = 0.01, softening_sq = 1e-9, steps = 100.
 */
struct NbParams nb_params_default(void);

/**
 * SoA, pow_then_divide, unblocked, one thread.
 */
struct NbVariant nb_variant_reference(void);

/**
 * `20 · n² · steps / (seconds · 10⁹)`.
 *
 * # Safety
 * `out` must be null or point to writable storage for one `double`.
 */
enum NbStatus nb_gflops(size_t n, uint64_t steps, double seconds, double *out);

/**
 * Seeded initial conditions.
 *
 * # Safety
 * `out` must be null or point to writable storage for one handle pointer.
 */
enum NbStatus nb_system_init(size_t n,
                             uint64_t seed,
                             int32_t precision,
                             int32_t layout,
                             struct NbSystem **out);

/**
 * System from caller-owned double arrays of length `n` (rounded when
 * `precision` is single). Inputs are copied.
 *
 * # Safety
 * Each array pointer must be null or valid for `n` reads; `out` as in
 * `nb_system_init`.
 */
enum NbStatus nb_system_from_arrays(size_t n,
                                    int32_t precision,
                                    int32_t layout,
                                    const double *px,
                                    const double *py,
                                    const double *pz,
                                    const double *vx,
                                    const double *vy,
                                    const double *vz,
                                    const double *masses,
                                    struct NbSystem **out);

/**
 * Releases a handle. Null is a no-op.
 *
 * # Safety
 * `sys` must be null or a handle from this library not yet freed.
 */
void nb_system_free(struct NbSystem *sys);

/**
 * # Safety
 * `sys` must be a live handle or null; `out` writable or null.
 */
enum NbStatus nb_system_len(const struct NbSystem *sys, size_t *out);

/**
 * Writes `NB_PRECISION_*`.
 *
 * # Safety
 * As `nb_system_len`.
 */
enum NbStatus nb_system_precision(const struct NbSystem *sys, int32_t *out);

/**
 * Writes `NB_LAYOUT_*`.
 *
 * # Safety
 * As `nb_system_len`.
 */
enum NbStatus nb_system_layout(const struct NbSystem *sys, int32_t *out);

/**
 * Sum of all position coordinates, accumulated in double in index order.
 *
 * # Safety
 * As `nb_system_len`.
 */
enum NbStatus nb_system_checksum(const struct NbSystem *sys, double *out);

/**
 * New handle holding a bitwise copy of `sys` in `layout`.
 *
 * # Safety
 * `sys` live handle; `out` as in `nb_system_init`.
 */
enum NbStatus nb_system_convert_layout(const struct NbSystem *sys,
                                       int32_t layout,
                                       struct NbSystem **out);

/**
 * Copies positions (widened to double) into three arrays of `len` entries.
 *
 * # Safety
 * `x`, `y`, `z` must each be valid for `len` writes.
 */
enum NbStatus nb_system_positions(const struct NbSystem *sys,
                                  double *x,
                                  double *y,
                                  double *z,
                                  size_t len);

/**
 * Copies velocities (widened to double).
 *
 * # Safety
 * As `nb_system_positions`.
 */
enum NbStatus nb_system_velocities(const struct NbSystem *sys,
                                   double *x,
                                   double *y,
                                   double *z,
                                   size_t len);

/**
 * One acceleration evaluation, written (widened to double) into `ax`,
 * `ay`, `az` of `len` entries. The variant layout must match the system.
 *
 * # Safety
 * Pointers as in `nb_system_positions`; `params`/`variant` readable.
 */
enum NbStatus nb_compute_accelerations(const struct NbSystem *sys,
                                       const struct NbParams *params,
                                       const struct NbVariant *variant,
                                       double *ax,
                                       double *ay,
                                       double *az,
                                       size_t len);

/**
 * Runs `params->steps` steps and returns the final state as a new handle;
 * `sys` is unchanged.
 *
 * # Safety
 * `sys` live handle; `params`/`variant` readable; `out` writable.
 */
enum NbStatus nb_simulate(const struct NbSystem *sys,
                          const struct NbParams *params,
                          const struct NbVariant *variant,
                          struct NbSystem **out);

/**
 * Times `repetitions` simulations of a seeded system after `warmup`
 * unmeasured runs.
 *
 * # Safety
 * `params`/`variant` readable; `out` writable.
 */
enum NbStatus nb_measure(size_t n,
                         uint64_t seed,
                         int32_t precision,
                         const struct NbParams *params,
                         const struct NbVariant *variant,
                         uint64_t repetitions,
                         uint64_t warmup,
                         struct NbBenchSummary *out);

/**
 * Checks one variant at `precision` against the double-precision oracle
 * from the seeded initial conditions.
 *
 * # Safety
 * `params`/`variant` readable; `out` writable.
 */
enum NbStatus nb_cross_validate(size_t n,
                                uint64_t seed,
                                int32_t precision,
                                const struct NbParams *params,
                                const struct NbVariant *variant,
                                struct NbValidation *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NBODY_FFI_H */

#ifndef FDKP_H
#define FDKP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Which component of a wave to extract.
 */
typedef enum {
  FDKP_COMPONENT_PROFILE = 0,
  FDKP_COMPONENT_LOW = 1,
  FDKP_COMPONENT_HIGH = 2,
} FdkpComponent;

typedef enum {
  FDKP_FRAME_PHYSICAL = 0,
  FDKP_FRAME_KP_SCALED = 1,
} FdkpFrame;

typedef enum {
  FDKP_STATUS_OK = 0,
  FDKP_STATUS_NULL_POINTER = 1,
  FDKP_STATUS_INVALID_ARGUMENT = 2,
  FDKP_STATUS_NOT_CONVERGED = 3,
  FDKP_STATUS_BUFFER_TOO_SMALL = 4,
  FDKP_STATUS_IO = 5,
  FDKP_STATUS_PANIC = 6,
} FdkpStatus;

/**
 * A sampled field.
 */
typedef struct FdkpField FdkpField;

/**
 * An assembled solitary wave.
 */
typedef struct FdkpWave FdkpWave;

typedef struct {
  double beta;
  double delta;
  double epsilon;
  double theta;
  double sobolev_s;
  double ball_m;
  double epsilon_max;
} FdkpParams;

typedef struct {
  double half_width_x;
  double half_width_y;
  uintptr_t points_x;
  uintptr_t points_y;
} FdkpGrid;

/**
 * Summary of one Newton solve.
 */
typedef struct {
  uintptr_t newton_steps;
  double reduced_residual;
  double full_relative_residual;
  double speed;
  double asymmetry;
} FdkpSolveInfo;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Version string of the library; static, never freed.
 */
const char *fdkp_version(void);

/**
 * Copies the last error message of this thread, NUL-terminated, into `buf`.
 * `required` receives the buffer size needed including the terminator (1 when
 * there is no error).
 *
 * # Safety
 * `buf` must be valid for `len` bytes or null with `len == 0`.
 */
FdkpStatus fdkp_last_error(char *buf, uintptr_t len, uintptr_t *required);

/**
 * # Safety
 * `params` must be null or point to writable memory.
 */
FdkpStatus fdkp_params_default(FdkpParams *params);

/**
 * # Safety
 * `grid` must be null or point to writable memory.
 */
FdkpStatus fdkp_grid_default(FdkpGrid *grid);

/**
 * Derivative `d_x^a d_y^b` of the lump `k` at `(x, y)`.
 *
 * # Safety
 * `value` must be null or point to writable memory.
 */
FdkpStatus fdkp_lump_eval(uintptr_t k, double x, double y, uintptr_t a, uintptr_t b, double *value);

/**
 * Pointwise residual of the normalised steady KP-I equation at the lump `k`.
 *
 * # Safety
 * `value` must be null or point to writable memory.
 */
FdkpStatus fdkp_lump_residual(uintptr_t k, double x, double y, double *value);

/**
 * Phase speed `c(k1)` along `k2 = 0`.
 *
 * # Safety
 * `params` must be null or valid; `value` must be null or writable.
 */
FdkpStatus fdkp_dispersion_speed(double k1, const FdkpParams *params, double *value);

/**
 * Samples the lump `k` onto `grid`; the handle is released with [`fdkp_field_free`].
 *
 * # Safety
 * Pointer arguments must be null or valid.
 */
FdkpStatus fdkp_field_sample_lump(const FdkpGrid *grid,
                                  uintptr_t k,
                                  FdkpFrame frame,
                                  const FdkpParams *params,
                                  FdkpField **field);

/**
 * # Safety
 * `field` must be null or a handle from this library not yet freed.
 */
void fdkp_field_free(FdkpField *field);

/**
 * # Safety
 * Pointer arguments must be null or valid.
 */
FdkpStatus fdkp_field_shape(const FdkpField *field, uintptr_t *nx, uintptr_t *ny);

/**
 * Copies the samples row-major, index `(ix, iy)` at `ix * ny + iy`.
 *
 * # Safety
 * `buf` must be valid for `len` doubles.
 */
FdkpStatus fdkp_field_samples(const FdkpField *field, double *buf, uintptr_t len);

/**
 * # Safety
 * Pointer arguments must be null or valid.
 */
FdkpStatus fdkp_field_asymmetry(const FdkpField *field, double *value);

/**
 * Newton solve of the reduced equation at `params.epsilon`, seeded with the
 * lump `k`, followed by reassembly. The wave is released with [`fdkp_wave_free`].
 *
 * # Safety
 * Pointer arguments must be null or valid; `info` may be null.
 */
FdkpStatus fdkp_solve(const FdkpGrid *grid,
                      const FdkpParams *params,
                      uintptr_t k,
                      FdkpWave **wave,
                      FdkpSolveInfo *info);

/**
 * # Safety
 * `wave` must be null or a handle from this library not yet freed.
 */
void fdkp_wave_free(FdkpWave *wave);

/**
 * Copies one component of the scaled profile into a new field handle.
 *
 * # Safety
 * Pointer arguments must be null or valid.
 */
FdkpStatus fdkp_wave_component(const FdkpWave *wave, FdkpComponent component, FdkpField **field);

/**
 * # Safety
 * Pointer arguments must be null or valid.
 */
FdkpStatus fdkp_wave_speed(const FdkpWave *wave, double *speed);

/**
 * Runs an amplitude sweep and returns the report as a NUL-terminated JSON
 * string, released with [`fdkp_string_free`].
 *
 * # Safety
 * `epsilons` must be valid for `count` doubles; other pointers null or valid.
 */
FdkpStatus fdkp_sweep_json(uintptr_t k,
                           const double *epsilons,
                           uintptr_t count,
                           const FdkpGrid *grid,
                           const FdkpParams *params,
                           char **json);

/**
 * # Safety
 * `s` must be null or a string returned by this library not yet freed.
 */
void fdkp_string_free(char *s);

/**
 * Smallest-magnitude symmetric eigenvalue of the linearised KP operator at
 * the lump `k`, on `grid` and its refinement. `relative_change` may be null.
 *
 * # Safety
 * Pointer arguments must be null or valid.
 */
FdkpStatus fdkp_probe(uintptr_t k,
                      const FdkpGrid *grid,
                      const FdkpParams *params,
                      double *eigenvalue,
                      double *relative_change);

/**
 * The probe iteration with the lump replaced by zero; returns exactly 1.
 *
 * # Safety
 * Pointer arguments must be null or valid.
 */
FdkpStatus fdkp_probe_control(const FdkpGrid *grid, const FdkpParams *params, double *eigenvalue);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FDKP_H */

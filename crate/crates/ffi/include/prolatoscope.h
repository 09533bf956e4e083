#ifndef PROLATOSCOPE_H
#define PROLATOSCOPE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Light model for `ps_select_max_modes`.
 */
typedef enum PsNoiseModel {
  PS_NOISE_MODEL_COHERENT = 0,
  PS_NOISE_MODEL_SQUEEZED = 1,
} PsNoiseModel;

/**
 * Status codes returned by every fallible function.
 */
typedef enum PsStatus {
  PS_STATUS_OK = 0,
  PS_STATUS_NULL_POINTER = 1,
  PS_STATUS_INVALID_ARGUMENT = 2,
  PS_STATUS_NUMERICAL = 3,
  PS_STATUS_IO = 4,
  PS_STATUS_FORMAT = 5,
  PS_STATUS_PANIC = 6,
} PsStatus;

/**
 * Opaque prolate basis.
 */
typedef struct PsBasis PsBasis;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *ps_version(void);

/**
 * Last error message on this thread, or null. Valid until the next failing
 * call on the same thread.
 */
const char *ps_last_error_message(void);

/**
 * Builds a basis of `num_modes` functions for bandwidth `c`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum PsStatus ps_basis_build(double c,
                             size_t num_modes,
                             size_t precision_bits,
                             struct PsBasis **out);

/**
 * Loads a basis cache file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum PsStatus ps_basis_load(const char *path, struct PsBasis **out);

/**
 * Writes a basis cache file.
 *
 * # Safety
 * `basis` must come from this library; `path` must be NUL-terminated.
 */
enum PsStatus ps_basis_save(const struct PsBasis *basis, const char *path);

/**
 * Releases a basis. Null is ignored.
 *
 * # Safety
 * `basis` must come from this library and not be used afterwards.
 */
void ps_basis_free(struct PsBasis *basis);

/**
 * Number of modes, or 0 for a null handle.
 *
 * # Safety
 * `basis` must be null or come from this library.
 */
size_t ps_basis_num_modes(const struct PsBasis *basis);

/**
 * Space-bandwidth product, or NaN for a null handle.
 *
 * # Safety
 * `basis` must be null or come from this library.
 */
double ps_basis_c(const struct PsBasis *basis);

/**
 * Eigenvalue of mode `n` as a double.
 *
 * # Safety
 * `basis` must come from this library; `out` must be writable.
 */
enum PsStatus ps_lambda(const struct PsBasis *basis, size_t n, double *out);

/**
 * Eigenvalue of mode `n` as mantissa in [1, 10) and decimal exponent.
 *
 * # Safety
 * `basis` must come from this library; both outputs must be writable.
 */
enum PsStatus ps_lambda_parts(const struct PsBasis *basis,
                              size_t n,
                              double *mantissa,
                              int32_t *exponent);

/**
 * Core-normalized function on |s| <= 1.
 *
 * # Safety
 * `basis` must come from this library; `out` must be writable.
 */
enum PsStatus ps_eval_phi(const struct PsBasis *basis, size_t n, double x, double *out);

/**
 * Full-line function.
 *
 * # Safety
 * `basis` must come from this library; `out` must be writable.
 */
enum PsStatus ps_eval_psi(const struct PsBasis *basis, size_t n, double x, double *out);

/**
 * Wing function on |s| > 1.
 *
 * # Safety
 * `basis` must come from this library; `out` must be writable.
 */
enum PsStatus ps_eval_chi(const struct PsBasis *basis, size_t n, double x, double *out);

/**
 * Imaging half-width `w`, reconstruction half-width `w_l` and their ratio
 * `s` for the first `l` modes. Any output may be null.
 *
 * # Safety
 * `basis` must come from this library; non-null outputs must be writable.
 */
enum PsStatus ps_superres_factor(const struct PsBasis *basis,
                                 size_t l,
                                 double *w,
                                 double *w_l,
                                 double *s);

/**
 * Mean photon number for a power (W), wavelength (m) and exposure (s).
 *
 * # Safety
 * `out` must be writable.
 */
enum PsStatus ps_photons_from_power(double power, double wavelength, double time, double *out);

/**
 * Largest usable mode count at `photons` for a point probe of width `eps`.
 * `r` is ignored for coherent light. `no_reconstruction` may be null.
 *
 * # Safety
 * `basis` must come from this library; `l_star` must be writable.
 */
enum PsStatus ps_select_max_modes(const struct PsBasis *basis,
                                  enum PsNoiseModel model,
                                  double r,
                                  double photons,
                                  double eps,
                                  size_t *l_star,
                                  bool *no_reconstruction);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PROLATOSCOPE_H */

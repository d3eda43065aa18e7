#ifndef CAVITY_DCE_H
#define CAVITY_DCE_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum DceStatus {
  DCE_STATUS_OK = 0,
  DCE_STATUS_NULL_POINTER = 1,
  DCE_STATUS_INVALID_ARGUMENT = 2,
  DCE_STATUS_NO_CONVERGENCE = 3,
  DCE_STATUS_PRECONDITION = 4,
  DCE_STATUS_RESOURCE = 5,
  DCE_STATUS_IO = 6,
  DCE_STATUS_PANIC = 7,
} DceStatus;

/**
 * Opaque mode table.
 */
typedef struct DceSpectrum DceSpectrum;

/**
 * One ψ mode of a spectrum.
 */
typedef struct DceMode {
  uint32_t mx;
  uint32_t my;
  uint32_t mz;
  double k0;
  double epsilon;
  double omega_bar;
  double omega_tilde;
} DceMode;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *dce_last_error(void);

/**
 * Static, NUL-terminated library version.
 */
const char *dce_version(void);

/**
 * Wavenumber on branch `m` of `2k·cot(k·lx/2) = −v`.
 *
 * # Safety
 * `out_k` must be null or point to writable memory for one `double`.
 */
enum DceStatus dce_solve_k(double v, double lx, uint32_t m, double *out_k);

/**
 * Modulation depth of longitudinal branch `mx` for the given cavity.
 *
 * # Safety
 * `out_eps` must be null or point to writable memory for one `double`.
 */
enum DceStatus dce_epsilon(double lx,
                           double ly,
                           double lz,
                           double v0,
                           double vmax,
                           uint32_t mx,
                           double *out_eps);

/**
 * Amplitudes and phases of harmonics `1..=j_max` of the linear ramp.
 *
 * # Safety
 * `amplitudes` and `phases` must be null or point to `j_max` writable
 * `double`s each.
 */
enum DceStatus dce_fourier_ramp(double period,
                                double tau_e,
                                uint32_t j_max,
                                double *amplitudes,
                                double *phases);

/**
 * `(eps_n/eps_mov)(period_mov/period)`.
 *
 * # Safety
 * `out` must be null or point to writable memory for one `double`.
 */
enum DceStatus dce_rate_ratio(double eps_n,
                              double period,
                              double eps_mov,
                              double period_mov,
                              double *out);

/**
 * Builds the ψ mode table with mean drive `f0`. Free with
 * [`dce_spectrum_free`].
 *
 * # Safety
 * `out` must be null or point to writable memory for one pointer.
 */
enum DceStatus dce_spectrum_new(double lx,
                                double ly,
                                double lz,
                                double v0,
                                double vmax,
                                double f0,
                                uint32_t nx,
                                uint32_t ny,
                                uint32_t nz,
                                struct DceSpectrum **out);

/**
 * # Safety
 * `spectrum` must be null or a pointer from [`dce_spectrum_new`] that has
 * not been freed.
 */
void dce_spectrum_free(struct DceSpectrum *spectrum);

/**
 * # Safety
 * `spectrum` must be null or a live handle; `out_len` null or writable.
 */
enum DceStatus dce_spectrum_len(const struct DceSpectrum *spectrum, size_t *out_len);

/**
 * # Safety
 * `spectrum` must be null or a live handle; `out_mode` null or writable.
 */
enum DceStatus dce_spectrum_mode(const struct DceSpectrum *spectrum,
                                 size_t index,
                                 struct DceMode *out_mode);

/**
 * Photon number of mode `index` under a single drive harmonic of the given
 * amplitude and phase placed exactly on its parametric resonance, at slow
 * times `tau[0..n]`.
 *
 * # Safety
 * `spectrum` must be null or a live handle; `tau` and `out_n` null or
 * valid for `n` `double`s.
 */
enum DceStatus dce_parametric_photons(const struct DceSpectrum *spectrum,
                                      size_t index,
                                      double amplitude,
                                      double phase,
                                      const double *tau,
                                      size_t n,
                                      double *out_n);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CAVITY_DCE_H */

#ifndef CHIFIELD_H
#define CHIFIELD_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum ChifieldStatus {
  CHIFIELD_STATUS_OK = 0,
  CHIFIELD_STATUS_NULL_POINTER = 1,
  /**
   * Argument outside the domain of the quantity, or an invalid option.
   */
  CHIFIELD_STATUS_INVALID_ARGUMENT = 2,
  CHIFIELD_STATUS_INVALID_SPECTRUM = 3,
  CHIFIELD_STATUS_PARSE = 4,
  CHIFIELD_STATUS_DEGENERATE = 5,
  CHIFIELD_STATUS_NODAL_PROXIMITY = 6,
  CHIFIELD_STATUS_IO = 7,
  /**
   * An internal panic was caught.
   */
  CHIFIELD_STATUS_INTERNAL = 8,
} ChifieldStatus;

/**
 * Selects between the corrected formulas and the printed ones.
 */
typedef enum ChifieldSignVariant {
  CHIFIELD_SIGN_VARIANT_CORRECTED = 0,
  CHIFIELD_SIGN_VARIANT_PAPER_TEXT = 1,
} ChifieldSignVariant;

/**
 * Opaque chi field on the sphere: `k` independent realizations of a spectrum.
 */
typedef struct ChifieldChiField ChifieldChiField;

/**
 * Opaque angular power spectrum.
 */
typedef struct ChifieldSpectrum ChifieldSpectrum;

/**
 * Monte Carlo estimate with its standard error.
 */
typedef struct ChifieldEstimate {
  double value;
  double std_error;
  uint64_t n;
} ChifieldEstimate;

/**
 * Critical-point tallies of one realization above a threshold.
 */
typedef struct ChifieldCounts {
  /**
   * Critical points with value `>= t`.
   */
  uint64_t above;
  uint64_t maxima;
  /**
   * `sum (-1)^index` over points with value `>= t`.
   */
  int64_t signed_ec;
} ChifieldCounts;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *chifield_version(void);

/**
 * Message of the last failed call on this thread, or null after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *chifield_last_error_message(void);

/**
 * Probabilists' Hermite polynomial `H_n(t)`.
 */
double chifield_hermite(uint32_t n, double t);

/**
 * `E[chi_k^{-m}]`; fails when `k <= m`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum ChifieldStatus chifield_inv_chi_constant(uint32_t k, uint32_t m, double *out);

/**
 * Expected number of local maxima above `t` of a chi^2-dof field on the
 * sphere of radius `r`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum ChifieldStatus chifield_maxima_density_sphere(double r,
                                                   double t,
                                                   enum ChifieldSignVariant variant,
                                                   double *out);

/**
 * Expected Euler characteristic of the excursion set above `t` of a chi
 * field with two degrees of freedom on the sphere of radius `r`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum ChifieldStatus chifield_ec_sum_product(double r, double t, double *out);

/**
 * Monte Carlo estimate of the maxima functional `D_k(t)` for the 2x2
 * Hessian model `(sigma2, c)`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum ChifieldStatus chifield_estimate_dk(uint32_t k,
                                         double t,
                                         double sigma2,
                                         double c,
                                         uint64_t n,
                                         uint64_t seed,
                                         struct ChifieldEstimate *out);

/**
 * Expected number of local maxima above `t` on a 2-manifold of the given
 * volume, for the Hessian model `(sigma2, c)`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum ChifieldStatus chifield_expected_maxima(uint32_t k,
                                             double t,
                                             double volume,
                                             double sigma2,
                                             double c,
                                             uint64_t n,
                                             uint64_t seed,
                                             struct ChifieldEstimate *out);

/**
 * Expected number of critical points above `t` (requires `k > 2`).
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum ChifieldStatus chifield_expected_critical_points(uint32_t k,
                                                      double t,
                                                      double volume,
                                                      double sigma2,
                                                      double c,
                                                      enum ChifieldSignVariant variant,
                                                      uint64_t n,
                                                      uint64_t seed,
                                                      struct ChifieldEstimate *out);

/**
 * Builds a spectrum from `n` pairs `(degrees[i], weights[i])`.
 *
 * # Safety
 * `degrees` and `weights` must point to `n` readable elements; `out` must be
 * valid for writes.
 */
enum ChifieldStatus chifield_spectrum_new(const uint32_t *degrees,
                                          const double *weights,
                                          size_t n,
                                          struct ChifieldSpectrum **out);

/**
 * Parses a spectrum from text with one `l C_l` pair per line (`#` comments).
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be valid for writes.
 */
enum ChifieldStatus chifield_spectrum_parse(const char *text, struct ChifieldSpectrum **out);

/**
 * Radius of the sphere on which a unit-variance field with this spectrum
 * has unit-variance gradient components.
 *
 * # Safety
 * `spec` must be a live handle; `out` must be valid for writes.
 */
enum ChifieldStatus chifield_spectrum_radius(const struct ChifieldSpectrum *spec, double *out);

/**
 * Covariance parameters `(sigma2, c)` of the Hessian of a field with this spectrum.
 *
 * # Safety
 * `spec` must be a live handle; `sigma2` and `c` must be valid for writes.
 */
enum ChifieldStatus chifield_spectrum_hessian_model(const struct ChifieldSpectrum *spec,
                                                    enum ChifieldSignVariant variant,
                                                    double *sigma2,
                                                    double *c);

/**
 * Releases a spectrum. Null is ignored.
 *
 * # Safety
 * `spec` must be null or a handle not yet freed.
 */
void chifield_spectrum_free(struct ChifieldSpectrum *spec);

/**
 * Draws realization `index` of a chi field with `k` components. The same
 * `(seed, index)` always gives the same field.
 *
 * # Safety
 * `spec` must be a live handle; `out` must be valid for writes.
 */
enum ChifieldStatus chifield_chi_field_new(const struct ChifieldSpectrum *spec,
                                           uint32_t k,
                                           uint64_t seed,
                                           uint64_t index,
                                           struct ChifieldChiField **out);

/**
 * Value of the chi field at the unit vector `p[0..3]` (normalized internally).
 *
 * # Safety
 * `field` must be a live handle, `p` must point to three doubles and `out`
 * must be valid for writes.
 */
enum ChifieldStatus chifield_chi_field_value(const struct ChifieldChiField *field,
                                             const double *p,
                                             double *out);

/**
 * Finds the critical points of the field on an icosphere mesh of the given
 * depth and tallies those with value `>= t`.
 *
 * # Safety
 * `field` must be a live handle; `out` must be valid for writes.
 */
enum ChifieldStatus chifield_chi_field_count(const struct ChifieldChiField *field,
                                             double t,
                                             uint32_t depth,
                                             struct ChifieldCounts *out);

/**
 * Releases a chi field. Null is ignored.
 *
 * # Safety
 * `field` must be null or a handle not yet freed.
 */
void chifield_chi_field_free(struct ChifieldChiField *field);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CHIFIELD_H */

#ifndef GEXCURSION_H
#define GEXCURSION_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible call.
 */
typedef enum GxStatus {
  GX_STATUS_OK = 0,
  GX_STATUS_NULL_POINTER = 1,
  GX_STATUS_INVALID_PARAMETER = 2,
  GX_STATUS_POINT_OUT_OF_DOMAIN = 3,
  GX_STATUS_NO_CONVERGENCE = 4,
  GX_STATUS_NOT_POSITIVE_DEFINITE = 5,
  GX_STATUS_GRID_TOO_LARGE = 6,
  GX_STATUS_PANIC = 7,
} GxStatus;

typedef enum GxRegime {
  GX_REGIME_SIDE_DOMINATED = 0,
  GX_REGIME_LOG_PRODUCT = 1,
  GX_REGIME_CRITICAL_PRODUCT = 2,
  GX_REGIME_CLASSICAL = 3,
} GxRegime;

/**
 * Opaque simulation grid handle.
 */
typedef struct GxGrid GxGrid;

/**
 * Opaque model handle.
 */
typedef struct GxModel GxModel;

/**
 * `prefactor * u^u_power * (log u)^log_power`, times `Ψ(u)` when `uses_psi`.
 */
typedef struct GxPrediction {
  double prefactor;
  double u_power;
  uint32_t log_power;
  bool uses_psi;
} GxPrediction;

typedef struct GxEstimate {
  double value;
  double std_err;
  uint64_t n_samples;
} GxEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *gx_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *gx_version(void);

/**
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum GxStatus gx_model_new(double alpha,
                           double beta,
                           double a,
                           double horizon,
                           double c1,
                           double c2,
                           struct GxModel **out);

/**
 * # Safety
 * `model` must be null or a handle from [`gx_model_new`] not yet freed.
 */
void gx_model_free(struct GxModel *model);

/**
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
enum GxStatus gx_variance_loss(const struct GxModel *model, double t1, double t2, double *out);

/**
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
enum GxStatus gx_sigma(const struct GxModel *model, double t1, double t2, double *out);

/**
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
enum GxStatus gx_correlation(const struct GxModel *model,
                             double t1,
                             double t2,
                             double s1,
                             double s2,
                             double *out);

/**
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
enum GxStatus gx_covariance(const struct GxModel *model,
                            double t1,
                            double t2,
                            double s1,
                            double s2,
                            double *out);

/**
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
enum GxStatus gx_classify_regime(const struct GxModel *model, enum GxRegime *out);

/**
 * Standard normal survival function `Ψ(u)`.
 */
double gx_normal_survival(double u);

/**
 * # Safety
 * `out` must be writable.
 */
enum GxStatus gx_g_beta(double beta, double *out);

/**
 * # Safety
 * `out` must be writable.
 */
enum GxStatus gx_k_beta(double beta, double *out);

/**
 * # Safety
 * `out` must be writable.
 */
enum GxStatus gx_trend_l(double c, double *out);

/**
 * # Safety
 * `out` must be writable.
 */
enum GxStatus gx_trend_k(double c1, double c2, double *out);

/**
 * Untrended leading-order prediction; the model's slopes are ignored.
 *
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
enum GxStatus gx_predict(const struct GxModel *model, double h_alpha, struct GxPrediction *out);

/**
 * Trended prediction; requires `beta = 2`.
 *
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
enum GxStatus gx_predict_trend(const struct GxModel *model,
                               double h_alpha,
                               struct GxPrediction *out);

/**
 * Evaluates a prediction at level `u`.
 */
double gx_prediction_evaluate(struct GxPrediction p, double u);

/**
 * Finite-horizon Pickands functional `E sup exp(√2 B(t) − t^α)` on
 * `n_points` grid points over `[0, s]`.
 *
 * # Safety
 * `out` must be writable.
 */
enum GxStatus gx_pickands_finite(double alpha,
                                 double s,
                                 size_t n_points,
                                 uint64_t n_replicates,
                                 uint64_t seed,
                                 struct GxEstimate *out);

/**
 * Uniform `n_per_axis × n_per_axis` lattice over the model's square, with
 * its covariance factor.
 *
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
enum GxStatus gx_grid_new(const struct GxModel *model, size_t n_per_axis, struct GxGrid **out);

/**
 * # Safety
 * `grid` must be null or a handle from [`gx_grid_new`] not yet freed.
 */
void gx_grid_free(struct GxGrid *grid);

/**
 * # Safety
 * `grid` must be a live handle and `out` writable.
 */
enum GxStatus gx_grid_n_points(const struct GxGrid *grid, size_t *out);

/**
 * `P{max over the lattice of X(t) − c1 t1 − c2 t2 > u}` by Monte Carlo,
 * with the model's trend slopes.
 *
 * # Safety
 * `grid` must be a live handle and `out` writable.
 */
enum GxStatus gx_mc_excursion(const struct GxGrid *grid,
                              double u,
                              uint64_t n_samples,
                              uint64_t seed,
                              struct GxEstimate *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GEXCURSION_H */

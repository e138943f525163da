#ifndef ROBUST_DIFF_H
#define ROBUST_DIFF_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible call.
 */
typedef enum RdStatus {
  RD_STATUS_OK = 0,
  RD_STATUS_NULL_POINTER = -1,
  RD_STATUS_INVALID_ARGUMENT = -2,
  RD_STATUS_NOT_HURWITZ = -3,
  RD_STATUS_DIVERGED = -4,
  RD_STATUS_QUADRATURE = -5,
  RD_STATUS_UNKNOWN_SCENARIO = -6,
  RD_STATUS_IO = -7,
  /**
   * Steady-state error exceeded the theoretical bound.
   */
  RD_STATUS_BOUND_VIOLATED = -8,
} RdStatus;

/**
 * Integration method for the high-gain observer.
 */
typedef enum RdMethod {
  RD_METHOD_EULER = 0,
  RD_METHOD_RK4 = 1,
} RdMethod;

/**
 * Opaque high-gain observer differentiator.
 */
typedef struct RdHighGain RdHighGain;

/**
 * Opaque super-twisting differentiator.
 */
typedef struct RdSuperTwisting RdSuperTwisting;

typedef struct RdPeakingConstants {
  double upsilon;
  double phi;
  double p;
  double q;
  double quad_tolerance;
  double horizon;
  double achieved_error;
} RdPeakingConstants;

typedef struct RdRunReport {
  double steady_sup_error;
  double rmse_steady;
  /**
   * NaN when no bound applies.
   */
  double theoretical_bound;
  /**
   * 1 satisfied, 0 violated, -1 not applicable.
   */
  int32_t bound_satisfied;
  uint64_t steady_samples;
} RdRunReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or null.
 *
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *rd_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *rd_version(void);

/**
 * `lambda1 = mu1 sqrt(L)`, `lambda2 = mu2 L`.
 *
 * # Safety
 * `lambda1` and `lambda2` must be valid for writes.
 */
enum RdStatus rd_tune_super_twisting(double lipschitz,
                                     double mu1,
                                     double mu2,
                                     double *lambda1,
                                     double *lambda2);

/**
 * `b sqrt(L) sqrt(noise_bound)`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum RdStatus rd_st_accuracy_bound(double b, double lipschitz, double noise_bound, double *out);

/**
 * Creates a differentiator with `z0 = y0`, `z1 = 0`. Returns null on
 * invalid gains.
 */
struct RdSuperTwisting *rd_st_new(double lambda1, double lambda2, double y0);

/**
 * Consumes sample `y`, advances by `dt` and writes the derivative estimate.
 *
 * # Safety
 * `handle` must come from [`rd_st_new`] and not be freed; `estimate` must be
 * valid for writes.
 */
enum RdStatus rd_st_update(struct RdSuperTwisting *handle, double y, double dt, double *estimate);

/**
 * Writes `(z0_hat, z1_hat, v_last)`.
 *
 * # Safety
 * `handle` must be live; the out-pointers must be valid for writes.
 */
enum RdStatus rd_st_state(const struct RdSuperTwisting *handle,
                          double *z0_hat,
                          double *z1_hat,
                          double *v_last);

/**
 * # Safety
 * `handle` must be live.
 */
enum RdStatus rd_st_reset(struct RdSuperTwisting *handle, double y0);

/**
 * # Safety
 * `handle` must be null or come from [`rd_st_new`] and not be freed yet.
 */
void rd_st_free(struct RdSuperTwisting *handle);

bool rd_check_hurwitz(double alpha1, double alpha2);

/**
 * Peaking constants of `A = [[-alpha1, 1], [-alpha2, 0]]`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum RdStatus rd_peaking_constants(double alpha1,
                                   double alpha2,
                                   double quad_tolerance,
                                   double max_horizon,
                                   struct RdPeakingConstants *out);

/**
 * `sqrt(Q noise / (P M))`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum RdStatus rd_optimal_eps_gain(double p, double q, double m, double noise_bound, double *out);

/**
 * `c1 + eps P M + Q noise / eps`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum RdStatus rd_hg_error_bound_noisy(double c1,
                                      double eps_gain,
                                      double p,
                                      double q,
                                      double m,
                                      double noise_bound,
                                      double *out);

/**
 * `c1 + eps^2 Upsilon M`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum RdStatus rd_hg_error_bound_noisefree(double c1,
                                          double eps_gain,
                                          double upsilon,
                                          double m,
                                          double *out);

/**
 * Creates an observer with `x1 = y0`, `x2 = 0`. Returns null on invalid
 * parameters.
 */
struct RdHighGain *rd_hg_new(double alpha1,
                             double alpha2,
                             double eps_gain,
                             enum RdMethod method,
                             double y0);

/**
 * Advances one step. `y_start`, `y_mid`, `y_end` are the measurement at the
 * start, midpoint and end of the step (Euler reads only `y_start`). Writes
 * the new derivative estimate, and `stiff` = 1 when `dt` exceeds
 * `eps^2 / alpha2`. `stiff` may be null.
 *
 * # Safety
 * `handle` must be live; `estimate` must be valid for writes; `stiff` null
 * or valid for writes.
 */
enum RdStatus rd_hg_update(struct RdHighGain *handle,
                           double y_start,
                           double y_mid,
                           double y_end,
                           double dt,
                           double *estimate,
                           int32_t *stiff);

/**
 * Writes `(x1_hat, x2_hat)`.
 *
 * # Safety
 * `handle` must be live; out-pointers valid for writes.
 */
enum RdStatus rd_hg_state(const struct RdHighGain *handle, double *x1_hat, double *x2_hat);

/**
 * # Safety
 * `handle` must be live.
 */
enum RdStatus rd_hg_reset(struct RdHighGain *handle, double y0);

/**
 * # Safety
 * `handle` must be null or come from [`rd_hg_new`] and not be freed yet.
 */
void rd_hg_free(struct RdHighGain *handle);

/**
 * Runs a bundled scenario (by name) or a scenario file (by path).
 *
 * When `csv_path` is non-null the trace is written there. The report is
 * written even when the bound is violated, in which case
 * `RD_STATUS_BOUND_VIOLATED` is returned.
 *
 * # Safety
 * `selector` must be a NUL-terminated string; `csv_path` null or
 * NUL-terminated; `report` valid for writes.
 */
enum RdStatus rd_run_scenario(const char *selector,
                              const char *csv_path,
                              struct RdRunReport *report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ROBUST_DIFF_H */

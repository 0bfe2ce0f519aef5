#ifndef SPIKESLAB_H
#define SPIKESLAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum SsStatus {
  SS_STATUS_OK = 0,
  SS_STATUS_INVALID_ARGUMENT = 1,
  SS_STATUS_NUMERICAL_FAILURE = 2,
  SS_STATUS_CALIBRATION_INFEASIBLE = 3,
  SS_STATUS_NULL_POINTER = 4,
  SS_STATUS_PANIC = 5,
} SsStatus;

// Prior support layout.
typedef enum SsPriorMode {
  SS_PRIOR_MODE_DISJUNCT = 0,
  SS_PRIOR_MODE_FULL = 1,
} SsPriorMode;

// Support of a truncated normal, for [`ss_log_trunc_norm_const`].
typedef enum SsRegion {
  // `[-δ, δ]`
  SS_REGION_INNER = 0,
  // `|x| ≥ δ`
  SS_REGION_OUTER = 1,
  SS_REGION_FULL = 2,
} SsRegion;

// Prior hyperparameters with the calibrated spike variance.
typedef struct SsConfig SsConfig;

// Design matrix and response.
typedef struct SsData SsData;

// Retained draws of a finished chain.
typedef struct SsFit SsFit;

// Sampler controls; start from [`ss_sampler_settings_default`].
typedef struct SsSamplerSettings {
  size_t iterations;
  double burn_in_fraction;
  uint64_t seed;
  size_t thinning;
  // Accepted slice transitions per slab-variance update.
  size_t slice_burn_in;
  size_t slice_rejection_cap;
} SsSamplerSettings;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failure on this thread; empty after a success.
// The pointer stays valid until the next call on the same thread.
const char *ss_last_error_message(void);

// Builds a dataset from a row-major `n × d` matrix and `n` responses.
//
// # Safety
// `x` must point to `n * d` doubles and `y` to `n` doubles; `out_data` must be writable.
enum SsStatus ss_data_new(const double *x,
                          const double *y,
                          size_t n,
                          size_t d,
                          struct SsData **out_data);

// # Safety
// `data` must come from [`ss_data_new`] and not be used afterwards. Null is ignored.
void ss_data_free(struct SsData *data);

// Prior with default hyperparameters (`ν_r = 1`, `η_r² = 1`, `ν₁ = 1`, `η₁² = 100`).
//
// # Safety
// `out_config` must be writable.
enum SsStatus ss_config_new(double delta, enum SsPriorMode mode, struct SsConfig **out_config);

// Prior with explicit hyperparameters; the spike variance is calibrated when `delta > 0`.
//
// # Safety
// `out_config` must be writable.
enum SsStatus ss_config_new_with(double delta,
                                 enum SsPriorMode mode,
                                 double nu_r,
                                 double eta_r_sq,
                                 double nu_1,
                                 double eta_1_sq,
                                 struct SsConfig **out_config);

// Calibrated spike variance, or 0 for the Dirac spike at `δ = 0`.
//
// # Safety
// `config` must be a live handle and `out_value` writable.
enum SsStatus ss_config_sigma0_sq(const struct SsConfig *config, double *out_value);

// # Safety
// `config` must come from [`ss_config_new`] or [`ss_config_new_with`]. Null is ignored.
void ss_config_free(struct SsConfig *config);

struct SsSamplerSettings ss_sampler_settings_default(void);

// Runs the Gibbs sampler.
//
// # Safety
// `data` and `config` must be live handles, `settings` a valid pointer and `out_fit` writable.
enum SsStatus ss_fit(const struct SsData *data,
                     const struct SsConfig *config,
                     const struct SsSamplerSettings *settings,
                     struct SsFit **out_fit);

// # Safety
// `fit` must come from [`ss_fit`]. Null is ignored.
void ss_fit_free(struct SsFit *fit);

// Number of covariates, or 0 for a null handle.
//
// # Safety
// `fit` must be a live handle or null.
size_t ss_fit_dim(const struct SsFit *fit);

// Number of retained draws, or 0 for a null handle.
//
// # Safety
// `fit` must be a live handle or null.
size_t ss_fit_draws(const struct SsFit *fit);

// Writes the `d` posterior inclusion probabilities into `buffer`.
//
// # Safety
// `buffer` must have room for `len` doubles.
enum SsStatus ss_fit_inclusion_probabilities(const struct SsFit *fit, double *buffer, size_t len);

// Writes the `d` posterior mean coefficients into `buffer`.
//
// # Safety
// `buffer` must have room for `len` doubles.
enum SsStatus ss_fit_posterior_mean_beta(const struct SsFit *fit, double *buffer, size_t len);

// JSON summary with inclusion probabilities and the `top_k` most visited models.
// Release the string with [`ss_string_free`].
//
// # Safety
// `fit` must be a live handle and `out_json` writable.
enum SsStatus ss_fit_report_json(const struct SsFit *fit, size_t top_k, char **out_json);

// # Safety
// `s` must come from this library. Null is ignored.
void ss_string_free(char *s);

// Log Bayes factor of `model` against `alternative` from visit frequencies,
// divided by the prior odds when `correct_prior_odds` is non-zero. Infinite
// results are returned as `±INFINITY`.
//
// # Safety
// Index arrays must hold the given number of elements.
enum SsStatus ss_fit_log_bayes_factor(const struct SsFit *fit,
                                      const size_t *model,
                                      size_t model_len,
                                      const size_t *alternative,
                                      size_t alternative_len,
                                      int32_t correct_prior_odds,
                                      double *out_value);

// Spike variance matching the slab density at `δ`.
//
// # Safety
// `out_value` must be writable.
enum SsStatus ss_calibrate_sigma0(double delta, double nu_1, double eta_1_sq, double *out_value);

// Marginal slab density at `beta` (requires `|beta| ≥ delta`).
//
// # Safety
// `out_value` must be writable.
enum SsStatus ss_slab_marginal_density(double beta,
                                       double nu_1,
                                       double eta_1_sq,
                                       double delta,
                                       double *out_value);

// `log ∫_region exp(-(x - mean)² / (2 var)) dx`.
//
// # Safety
// `out_value` must be writable.
enum SsStatus ss_log_trunc_norm_const(enum SsRegion region,
                                      double delta,
                                      double mean,
                                      double var,
                                      double *out_value);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPIKESLAB_H */

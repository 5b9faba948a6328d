#ifndef PSEUDOMED_H
#define PSEUDOMED_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PmInference {
  PM_INFERENCE_DELTA = 0,
  PM_INFERENCE_SOBEL = 1,
  PM_INFERENCE_BOOTSTRAP = 2,
} PmInference;

typedef enum PmPseudoMethod {
  PM_PSEUDO_METHOD_INFLUENCE_FUNCTION = 0,
  PM_PSEUDO_METHOD_JACKKNIFE = 1,
} PmPseudoMethod;

typedef enum PmScale {
  PM_SCALE_SURVIVAL = 0,
  PM_SCALE_RMST = 1,
  // Cumulative incidence; the cause is passed separately.
  PM_SCALE_CIF = 2,
} PmScale;

// Result code of every call.
typedef enum PmStatus {
  PM_STATUS_OK = 0,
  PM_STATUS_NULL_POINTER = 1,
  PM_STATUS_INVALID_ARGUMENT = 2,
  PM_STATUS_INVALID_SAMPLE = 3,
  PM_STATUS_TAU_OUT_OF_RANGE = 4,
  PM_STATUS_RANK_DEFICIENT = 5,
  PM_STATUS_UNSUPPORTED = 6,
  PM_STATUS_ESTIMATION_FAILED = 7,
  PM_STATUS_BUFFER_TOO_SMALL = 8,
  PM_STATUS_PANIC = 9,
} PmStatus;

// Opaque sample handle.
typedef struct PmSample PmSample;

// Estimand selector: scale, cause (used only for `Cif`) and horizon.
typedef struct PmEstimand {
  enum PmScale scale;
  uint32_t cause;
  double tau;
} PmEstimand;

typedef struct PmInferenceOptions {
  enum PmInference method;
  enum PmPseudoMethod pseudo;
  // Nonzero for HC1 robust standard errors.
  int32_t robust_se;
  double alpha;
  size_t boot_reps;
  uint64_t seed;
  // Nonzero to resample within arms.
  int32_t stratified;
} PmInferenceOptions;

typedef struct PmEffect {
  double estimate;
  double se;
  double ci_lower;
  double ci_upper;
  double p_value;
} PmEffect;

typedef struct PmMediationResult {
  double theta_hat;
  double alpha_a;
  double beta_a;
  double beta_m;
  struct PmEffect nde;
  struct PmEffect nie;
  struct PmEffect te;
} PmMediationResult;

// Simulation scenario for the truth oracle. A `lambda_d <= 0` means no
// competing event.
typedef struct PmScenario {
  double k;
  int32_t direct_effect;
  int32_t indirect_effect;
  double mu0;
  double mu1;
  double lambda_d;
} PmScenario;

typedef struct PmTrueEffects {
  double te;
  double nde;
  double nie;
} PmTrueEffects;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the last failed call on this thread; empty after a
// successful call. Valid until the next call on the same thread.
const char *pm_last_error(void);

// Creates a sample from `n` subjects. `status` uses 0 for censored and
// `j >= 1` for cause `j`; `arm` is 0 or 1. The arrays are copied.
//
// # Safety
// Each array pointer must be valid for `n` reads; `out` must be writable.
enum PmStatus pm_sample_new(const double *times,
                            const uint32_t *status,
                            const uint8_t *arm,
                            const double *mediator,
                            size_t n,
                            struct PmSample **out);

// Releases a sample. Passing null is a no-op.
//
// # Safety
// `sample` must come from [`pm_sample_new`] and not have been freed.
void pm_sample_free(struct PmSample *sample);

// Number of subjects, or 0 for a null handle.
//
// # Safety
// `sample` must be null or a live handle.
size_t pm_sample_len(const struct PmSample *sample);

// Nonparametric estimate of the estimand from the pooled sample
// (Kaplan-Meier survival, RMST, or Aalen-Johansen cumulative incidence).
//
// # Safety
// `sample` must be a live handle and `out` writable.
enum PmStatus pm_estimate(const struct PmSample *sample, struct PmEstimand est, double *out);

// Writes one pseudo-value per subject into `out` (capacity `len`).
//
// # Safety
// `sample` must be a live handle and `out` valid for `len` writes.
enum PmStatus pm_pseudo_values(const struct PmSample *sample,
                               struct PmEstimand est,
                               enum PmPseudoMethod method,
                               double *out,
                               size_t len);

// Fits the mediation model and reports NDE, NIE and TE with inference.
//
// # Safety
// `sample` must be a live handle, `options` readable and `out` writable.
enum PmStatus pm_mediate(const struct PmSample *sample,
                         struct PmEstimand est,
                         const struct PmInferenceOptions *options,
                         struct PmMediationResult *out);

// True natural effects of the exponential simulation model at `est.tau`.
//
// # Safety
// `scenario` must be readable and `out` writable.
enum PmStatus pm_true_effects(const struct PmScenario *scenario,
                              struct PmEstimand est,
                              struct PmTrueEffects *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PSEUDOMED_H */

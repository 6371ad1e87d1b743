#ifndef HMF_H
#define HMF_H

/* Generated by cbindgen from crates/hmf-ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  HMF_STATUS_OK = 0,
  HMF_STATUS_NULL_POINTER = 1,
  HMF_STATUS_INVALID_ARGUMENT = 2,
  HMF_STATUS_DOMAIN = 3,
  /**
   * No nontrivial steady state in the bracket.
   */
  HMF_STATUS_HOMOGENEOUS_ONLY = 4,
  /**
   * Several roots in the bracket; narrow it.
   */
  HMF_STATUS_AMBIGUOUS_ROOT = 5,
  /**
   * Quadrature budget, non-finite state or failed consistency check.
   */
  HMF_STATUS_NUMERICAL = 6,
  HMF_STATUS_PANIC = 7,
} HmfStatus;

/**
 * A steady-state profile F(e).
 */
typedef struct HmfProfile HmfProfile;

/**
 * A solved steady state f₀ = F(v²/2 − m₀ cos θ).
 */
typedef struct HmfSteadyState HmfSteadyState;

typedef struct {
  double kappa0_quadrature;
  double kappa0_elliptic;
  /**
   * 1 when the two values agree to the default tolerance.
   */
  int32_t verified;
  /**
   * 1 when κ₀ < 1.
   */
  int32_t stable;
} HmfCriterion;

typedef struct {
  double initial_distance;
  double max_distance;
  double distance_growth;
  double energy_drift;
  double momentum_drift;
  double casimir_drop;
  double clipped_mass;
  /**
   * 1 when the run stopped early on a non-finite value.
   */
  int32_t stopped_early;
} HmfSimSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. Valid until the next call into the library.
 */
const char *hmf_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *hmf_version(void);

/**
 * F(e) = A·exp(−βe).
 *
 * # Safety
 * `out` must be valid for a write.
 */
HmfStatus hmf_profile_maxwell_boltzmann(double a, double beta, HmfProfile **out);

/**
 * F(e) = A·(e_* − e)₊^{1/(q−1)}, q > 1.
 *
 * # Safety
 * `out` must be valid for a write.
 */
HmfStatus hmf_profile_polytrope_compact(double a, double q, double e_star, HmfProfile **out);

/**
 * F(e) = A·(e₀ + e)^{1/(q−1)}, 1/3 < q < 1.
 *
 * # Safety
 * `out` must be valid for a write.
 */
HmfStatus hmf_profile_polytrope_noncompact(double a, double q, double e0, HmfProfile **out);

/**
 * F(e) = A / (1 + B·exp(βe)).
 *
 * # Safety
 * `out` must be valid for a write.
 */
HmfStatus hmf_profile_lynden_bell(double a, double b, double beta, HmfProfile **out);

/**
 * # Safety
 * `p` must be null or a handle not yet freed.
 */
void hmf_profile_free(HmfProfile *p);

/**
 * F(e); NaN for a null handle.
 *
 * # Safety
 * `p` must be null or a live handle.
 */
double hmf_profile_eval(const HmfProfile *p, double e);

/**
 * Solves M(m) = m for the nontrivial root in [m_lo, m_hi].
 *
 * # Safety
 * `profile` must be a live handle and `out` valid for a write.
 */
HmfStatus hmf_steady_state_solve(const HmfProfile *profile,
                                 double m_lo,
                                 double m_hi,
                                 HmfSteadyState **out);

/**
 * # Safety
 * `ss` must be null or a handle not yet freed.
 */
void hmf_steady_state_free(HmfSteadyState *ss);

/**
 * m₀, ‖f₀‖₁ and ℋ(f₀); any out-pointer may be null.
 *
 * # Safety
 * `ss` must be a live handle; non-null out-pointers valid for writes.
 */
HmfStatus hmf_steady_state_summary(const HmfSteadyState *ss,
                                   double *m0,
                                   double *mass,
                                   double *energy);

/**
 * κ₀ by both methods and the verdict κ₀ < 1.
 *
 * # Safety
 * `ss` must be a live handle and `out` valid for a write.
 */
HmfStatus hmf_criterion(const HmfSteadyState *ss, HmfCriterion *out);

/**
 * J(m), J′(m) and J″(m); any out-pointer may be null.
 *
 * # Safety
 * `ss` must be a live handle; non-null out-pointers valid for writes.
 */
HmfStatus hmf_reduced_energy(const HmfSteadyState *ss,
                             double m,
                             double *value,
                             double *first,
                             double *second);

/**
 * Runs f₀ plus a Gaussian bump of `amplitude`·‖f₀‖₁ (width 0.3, at the
 * bottom of the well) and summarizes the drift. `v_max` ≤ 0 selects the default.
 *
 * # Safety
 * `ss` must be a live handle and `out` valid for a write.
 */
HmfStatus hmf_simulate_bump(const HmfSteadyState *ss,
                            size_t n_theta,
                            size_t n_v,
                            double v_max,
                            double dt,
                            double t_end,
                            double amplitude,
                            HmfSimSummary *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HMF_H */

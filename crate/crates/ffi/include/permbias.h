/* C ABI for the permbias library. See include/permbias.h docs per function. */

#ifndef PERMBIAS_H
#define PERMBIAS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status code returned by every fallible call.
typedef enum PwbStatus {
  PWB_STATUS_OK = 0,
  // A required pointer argument was null.
  PWB_STATUS_NULL_POINTER = 1,
  // An argument was out of range (count, replications, ...).
  PWB_STATUS_INVALID_ARGUMENT = 2,
  PWB_STATUS_NON_POSITIVE_WEIGHT = 3,
  PWB_STATUS_DUPLICATE_LABEL = 4,
  PWB_STATUS_TOO_FEW_OBJECTS = 5,
  PWB_STATUS_DIMENSION_MISMATCH = 6,
  PWB_STATUS_NOT_A_PERMUTATION = 7,
  PWB_STATUS_TOO_LARGE_FOR_EXACT = 8,
  PWB_STATUS_DEGENERATE_DESIGN = 9,
  PWB_STATUS_TOO_FEW_POINTS = 10,
  // A label was not valid UTF-8.
  PWB_STATUS_UTF8 = 11,
} PwbStatus;

// How a p-value in [`PwbTestResult`] was obtained.
typedef enum PwbMethod {
  PWB_METHOD_EXACT = 0,
  PWB_METHOD_MONTE_CARLO = 1,
} PwbMethod;

// Opaque preference-vector handle.
typedef struct PwbPreference PwbPreference;

// Flat test outcome. `std_error` is NaN for the exact method. When
// `surprisal_censored` is nonzero, `surprisal` holds the censored lower
// bound `ln(replications / 3)` for a Monte Carlo estimate of zero.
typedef struct PwbTestResult {
  double observed_loglik;
  double p_value;
  double std_error;
  double ci_low;
  double ci_high;
  double surprisal;
  uint64_t replications;
  uint64_t tie_count;
  enum PwbMethod method;
  int surprisal_censored;
} PwbTestResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the most recent failure on this thread. The pointer
// stays valid until the next failing call on the same thread. Never null.
const char *pwb_last_error_message(void);

// Builds a preference vector from `len` weights; labels become "1", "2", ...
//
// # Safety
// `weights` must point to `len` readable doubles and `out` to a writable
// pointer slot.
enum PwbStatus pwb_preference_new(const double *weights, size_t len, struct PwbPreference **out);

// Builds a labelled preference vector.
//
// # Safety
// `labels` must point to `len` NUL-terminated strings, `weights` to `len`
// doubles, `out` to a writable pointer slot.
enum PwbStatus pwb_preference_new_labeled(const char *const *labels,
                                          const double *weights,
                                          size_t len,
                                          struct PwbPreference **out);

// Releases a handle from `pwb_preference_new*`. Null is a no-op.
//
// # Safety
// `pref` must be a pointer previously returned by this library and not yet
// freed.
void pwb_preference_free(struct PwbPreference *pref);

// Number of objects in the preference vector; 0 for a null handle.
//
// # Safety
// `pref` must be a live handle or null.
size_t pwb_preference_len(const struct PwbPreference *pref);

// Reduced log-likelihood of a ranking (nats).
//
// # Safety
// `pref` must be a live handle, `order` must point to `len` indices, `out`
// to a writable double.
enum PwbStatus pwb_log_likelihood(const struct PwbPreference *pref,
                                  const size_t *order,
                                  size_t len,
                                  double *out);

// Likelihood of a ranking, in `(0, 1]`.
//
// # Safety
// Same contract as [`pwb_log_likelihood`].
enum PwbStatus pwb_likelihood(const struct PwbPreference *pref,
                              const size_t *order,
                              size_t len,
                              double *out);

// Draws one ranking from stream `(master_seed, stream_index)` and writes the
// object indices, rank 1 first, into `out_order`.
//
// # Safety
// `pref` must be a live handle and `out_order` must have room for
// `pwb_preference_len(pref)` indices.
enum PwbStatus pwb_sample_permutation(const struct PwbPreference *pref,
                                      uint64_t master_seed,
                                      uint64_t stream_index,
                                      size_t *out_order);

// Exact p-value by enumerating all n! rankings; `exact_max_n` caps `n`
// (hard limit 12).
//
// # Safety
// `pref` must be a live handle, `order` must point to `len` indices, `out`
// to a writable result struct.
enum PwbStatus pwb_exact_pvalue(const struct PwbPreference *pref,
                                const size_t *order,
                                size_t len,
                                size_t exact_max_n,
                                struct PwbTestResult *out);

// Monte Carlo p-value from `replications` draws seeded by `master_seed`.
// Deterministic for fixed inputs, independent of thread count.
//
// # Safety
// Same contract as [`pwb_exact_pvalue`].
enum PwbStatus pwb_mc_pvalue(const struct PwbPreference *pref,
                             const size_t *order,
                             size_t len,
                             uint64_t replications,
                             uint64_t master_seed,
                             struct PwbTestResult *out);

// Self-information `-ln p` in nats; requires `p > 0`.
//
// # Safety
// `out` must point to a writable double.
enum PwbStatus pwb_surprisal(double p_value, double *out);

// Fits `ln(win_probability) = slope * elo + intercept`. With
// `huber != 0` the robust Huber M-estimator (IRLS) is used, otherwise
// ordinary least squares. `out_converged` receives 1 when the iteration
// converged (always 1 for OLS).
//
// # Safety
// `elo` and `win_probability` must point to `len` doubles; the three `out_*`
// pointers must be writable.
enum PwbStatus pwb_fit_elo_line(const double *elo,
                                const double *win_probability,
                                size_t len,
                                int huber,
                                double *out_slope,
                                double *out_intercept,
                                int *out_converged);

// Converts Elo ratings into a preference handle using a fitted slope:
// `w_i = exp(slope * (elo_i - mean elo))`; labels become "1", "2", ...
//
// # Safety
// `elo` must point to `len` doubles and `out` to a writable pointer slot.
enum PwbStatus pwb_elo_to_preference(double slope,
                                     const double *elo,
                                     size_t len,
                                     struct PwbPreference **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PERMBIAS_H */

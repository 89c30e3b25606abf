#ifndef TWINCF_H
#define TWINCF_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Comparison used by table targets.
 */
typedef enum TwincfCmp {
  TWINCF_CMP_EQ = 0,
  TWINCF_CMP_GE = 1,
  TWINCF_CMP_LE = 2,
} TwincfCmp;

/**
 * Result codes. `Ok` is 0; codes from 10 up mirror engine error kinds.
 */
typedef enum TwincfStatus {
  TWINCF_STATUS_OK = 0,
  TWINCF_STATUS_NULL_POINTER = 1,
  TWINCF_STATUS_INVALID_UTF8 = 2,
  TWINCF_STATUS_PANIC = 3,
  TWINCF_STATUS_CYCLE_DETECTED = 10,
  TWINCF_STATUS_PARTIAL_MECHANISM = 11,
  TWINCF_STATUS_BAD_DISTRIBUTION = 12,
  TWINCF_STATUS_UNKNOWN_VARIABLE = 13,
  TWINCF_STATUS_LATENT_INTERVENTION = 14,
  TWINCF_STATUS_VALUE_OUT_OF_RANGE = 15,
  TWINCF_STATUS_ENUMERATION_TOO_LARGE = 16,
  TWINCF_STATUS_ZERO_EVIDENCE = 17,
  TWINCF_STATUS_NO_ACCEPTED_SAMPLES = 18,
  TWINCF_STATUS_NON_BINARY = 19,
  TWINCF_STATUS_NO_MATCH = 20,
  TWINCF_STATUS_NON_FINITE_LOSS = 21,
  TWINCF_STATUS_DIMENSION_MISMATCH = 22,
  TWINCF_STATUS_INVALID_SPEC = 23,
  TWINCF_STATUS_INVALID_QUERY = 24,
  TWINCF_STATUS_INVALID_ORDERING = 25,
  TWINCF_STATUS_INVALID_DATA = 26,
  TWINCF_STATUS_INVALID_CONFIG = 27,
  TWINCF_STATUS_IO = 28,
  TWINCF_STATUS_JSON = 29,
  TWINCF_STATUS_CSV = 30,
} TwincfStatus;

/**
 * Opaque trained twin network.
 */
typedef struct TwincfModel TwincfModel;

/**
 * Opaque structural causal model.
 */
typedef struct TwincfScm TwincfScm;

typedef struct TwincfEstimate {
  double value;
  double stderr;
  uint64_t n_effective;
} TwincfEstimate;

typedef struct TwincfPoc {
  struct TwincfEstimate pn;
  struct TwincfEstimate ps;
  struct TwincfEstimate pns;
} TwincfPoc;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failing call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *twincf_last_error(void);

/**
 * Library version as a static string.
 */
const char *twincf_version(void);

/**
 * # Safety
 * `s` is null or a string returned by this library and not yet freed.
 */
void twincf_string_free(char *s);

/**
 * Parses an SCM from its JSON description into `*out`.
 *
 * # Safety
 * `json` is a NUL-terminated string; `out` is valid for writes.
 */
enum TwincfStatus twincf_scm_from_json(const char *json, struct TwincfScm **out);

/**
 * # Safety
 * `scm` is null or a handle from [`twincf_scm_from_json`] not yet freed.
 */
void twincf_scm_free(struct TwincfScm *scm);

/**
 * Sets the latent-enumeration cap used by exact inference.
 *
 * # Safety
 * `scm` is a live handle.
 */
enum TwincfStatus twincf_scm_set_enum_cap(struct TwincfScm *scm, uint64_t cap);

/**
 * Exact answer to a counterfactual query given as JSON.
 *
 * # Safety
 * `scm` is a live handle, `query` a NUL-terminated string, `out` valid for
 * writes.
 */
enum TwincfStatus twincf_query_exact(const struct TwincfScm *scm, const char *query, double *out);

/**
 * Twin-network rejection sampling with `n` draws.
 *
 * # Safety
 * As for [`twincf_query_exact`].
 */
enum TwincfStatus twincf_query_mc(const struct TwincfScm *scm,
                                  const char *query,
                                  size_t n,
                                  uint64_t seed,
                                  struct TwincfEstimate *out);

/**
 * Abduction-action-prediction with `n` draws.
 *
 * # Safety
 * As for [`twincf_query_exact`].
 */
enum TwincfStatus twincf_query_aap(const struct TwincfScm *scm,
                                   const char *query,
                                   size_t n,
                                   uint64_t seed,
                                   struct TwincfEstimate *out);

/**
 * Exact PN, PS and PNS for binary `treatment` and `outcome`.
 *
 * # Safety
 * `scm` is a live handle, the names NUL-terminated strings, `out` valid for
 * writes.
 */
enum TwincfStatus twincf_poc_exact(const struct TwincfScm *scm,
                                   const char *treatment,
                                   const char *outcome,
                                   struct TwincfPoc *out);

/**
 * Counts monotonicity and counterfactual-ordering violations under an
 * ordering given as JSON.
 *
 * # Safety
 * `scm` is a live handle, `ordering` a NUL-terminated string, the outputs
 * valid for writes.
 */
enum TwincfStatus twincf_check_ordering(const struct TwincfScm *scm,
                                        const char *ordering,
                                        size_t *monotone_violations,
                                        size_t *ordering_violations);

/**
 * Exact counterfactual table `P(Y_{T'} op value | X = T, Y = evidence)` and
 * forbidden-conditional residuals as a JSON object
 * `{"table": ..., "residuals": ...}`. Free `*out` with
 * [`twincf_string_free`].
 *
 * # Safety
 * `scm` is a live handle, `ordering` a NUL-terminated string, `out` valid
 * for writes.
 */
enum TwincfStatus twincf_table_json(const struct TwincfScm *scm,
                                    const char *ordering,
                                    uint32_t evidence,
                                    enum TwincfCmp op,
                                    uint32_t value,
                                    char **out);

/**
 * Parses a trained model from JSON into `*out`.
 *
 * # Safety
 * `json` is a NUL-terminated string; `out` is valid for writes.
 */
enum TwincfStatus twincf_model_from_json(const char *json, struct TwincfModel **out);

/**
 * # Safety
 * `model` is null or a handle from [`twincf_model_from_json`] not yet freed.
 */
void twincf_model_free(struct TwincfModel *model);

/**
 * Head distributions for one covariate vector and one noise sample.
 * `y` and `y_star` receive `n_outcomes` probabilities each.
 *
 * # Safety
 * `model` is a live handle; `z` and `u` point to `z_len` and `u_len`
 * doubles (either may be null when its length is 0); `y` and `y_star`
 * have room for `n_outcomes` doubles.
 */
enum TwincfStatus twincf_model_forward(const struct TwincfModel *model,
                                       size_t x,
                                       size_t x_star,
                                       const double *z,
                                       size_t z_len,
                                       const double *u,
                                       size_t u_len,
                                       double *y,
                                       double *y_star,
                                       size_t n_outcomes);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TWINCF_H */

#ifndef LOCALTIME_H
#define LOCALTIME_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define LT_OK 0

#define LT_NULL_POINTER 1

#define LT_INVALID_INPUT 2

#define LT_COMPUTATION_FAILED 3

#define LT_BUFFER_TOO_SMALL 4

#define LT_PANIC 5

/**
 * Weights are normalized row by row.
 */
#define LT_MODE_ADJACENCY 0

/**
 * Weights are probabilities and only validated.
 */
#define LT_MODE_STOCHASTIC 1

/**
 * Functionals for [`lt_simulate`]: `L(a)`.
 */
#define LT_FUNCTIONAL_MEAN 0

/**
 * `L(a) L(b)`.
 */
#define LT_FUNCTIONAL_PRODUCT 1

/**
 * `[L(a) == b]`.
 */
#define LT_FUNCTIONAL_INDICATOR 2

/**
 * `[L(a) == 0]`.
 */
#define LT_FUNCTIONAL_ZERO_VISIT 3

/**
 * Opaque transition matrix.
 */
typedef struct LtChain LtChain;

typedef struct LtEstimate {
  double mean;
  double standard_error;
  uint64_t trials_used;
} LtEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Builds a chain from `size * size` row-major weights.
 *
 * # Safety
 * `entries` must point to `size * size` readable doubles and `out` to a
 * writable handle slot.
 */
int32_t lt_chain_new(const double *entries, size_t size, int32_t mode, struct LtChain **out);

/**
 * Releases a chain. Null is ignored.
 *
 * # Safety
 * `chain` must come from [`lt_chain_new`] and not be used afterwards.
 */
void lt_chain_free(struct LtChain *chain);

/**
 * Number of vertices, or 0 for a null handle.
 *
 * # Safety
 * `chain` must be null or a live handle.
 */
size_t lt_chain_size(const struct LtChain *chain);

/**
 * Probability `p(from, to)`.
 *
 * # Safety
 * `chain` must be a live handle and `out` writable.
 */
int32_t lt_chain_entry(const struct LtChain *chain, size_t from, size_t to, double *out);

/**
 * `<1>`: `P^n[va, vb]` for a fixed endpoint, 1 for a free one.
 *
 * # Safety
 * `chain` must be a live handle and `out` writable.
 */
int32_t lt_normalization(const struct LtChain *chain, size_t va, int64_t vb, size_t n, double *out);

/**
 * Mean local time `<L(v1)>`.
 *
 * # Safety
 * `chain` must be a live handle and `out` writable.
 */
int32_t lt_mean(const struct LtChain *chain,
                size_t va,
                int64_t vb,
                size_t v1,
                size_t n,
                double *out);

/**
 * `<L(v1) L(v2)>`.
 *
 * # Safety
 * `chain` must be a live handle and `out` writable.
 */
int32_t lt_correlation(const struct LtChain *chain,
                       size_t va,
                       int64_t vb,
                       size_t v1,
                       size_t v2,
                       size_t n,
                       double *out);

/**
 * Weight of the paths that never visit `v`.
 *
 * # Safety
 * `chain` must be a live handle and `out` writable.
 */
int32_t lt_zero_visit(const struct LtChain *chain,
                      size_t va,
                      int64_t vb,
                      size_t v,
                      size_t n,
                      double *out);

/**
 * Distribution of `L(v)` for `l = 0..len`. When `len <= n` the last entry
 * holds every count `>= len - 1`.
 *
 * # Safety
 * `chain` must be a live handle and `buffer` must hold `len` writable
 * doubles.
 */
int32_t lt_distribution(const struct LtChain *chain,
                        size_t va,
                        int64_t vb,
                        size_t v,
                        size_t n,
                        double *buffer,
                        size_t len);

/**
 * Stationary distribution into `buffer` (`len >= size`).
 *
 * # Safety
 * `chain` must be a live handle and `buffer` must hold `len` writable
 * doubles.
 */
int32_t lt_stationary(const struct LtChain *chain, double *buffer, size_t len);

/**
 * `<va| (P - zI)^-1 |vb>` for real `z > 1`.
 *
 * # Safety
 * `chain` must be a live handle and `out` writable.
 */
int32_t lt_resolvent(const struct LtChain *chain, double z, size_t va, size_t vb, double *out);

/**
 * `<va| (P e^U - zI)^-1 |vb>` with `U = u |v><v|`.
 *
 * # Safety
 * `chain` must be a live handle and `out` writable.
 */
int32_t lt_deformed_resolvent(const struct LtChain *chain,
                              double z,
                              size_t v,
                              double u,
                              size_t va,
                              size_t vb,
                              double *out);

/**
 * Monte Carlo estimate of a path functional. For a fixed endpoint only the
 * paths ending at `vb` are kept, so the estimate is the normalized average.
 *
 * # Safety
 * `chain` must be a live handle and `out` writable.
 */
int32_t lt_simulate(const struct LtChain *chain,
                    int32_t functional,
                    size_t a,
                    size_t b,
                    size_t va,
                    int64_t vb,
                    size_t n,
                    uint64_t seed,
                    uint64_t trials,
                    struct LtEstimate *out);

/**
 * Message of the last failure on this thread, or null. The pointer stays
 * valid until the next call into this library from the same thread.
 */
const char *lt_last_error(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LOCALTIME_H */

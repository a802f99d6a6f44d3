#ifndef QDEDE_H
#define QDEDE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stdint.h>

#define QD_OK 0

/**
 * A required pointer argument was null.
 */
#define QD_ERR_NULL 1

/**
 * A string argument was not valid UTF-8.
 */
#define QD_ERR_UTF8 2

/**
 * Invalid parameters or context.
 */
#define QD_ERR_PARAM 3

/**
 * Arithmetic breakdown (division by zero, degenerate q, no convergence).
 */
#define QD_ERR_ARITH 4

/**
 * A verification run completed with at least one failing check.
 */
#define QD_ERR_VERIFY 5

/**
 * The library panicked; this is a bug.
 */
#define QD_ERR_INTERNAL 6

/**
 * Opaque computation context.
 */
typedef struct QdContext QdContext;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates a rational-mode context. `q` is `"n"` or `"n/d"`.
 *
 * # Safety
 * `q` must be a NUL-terminated string and `out` a valid pointer.
 */
int32_t qd_context_new_rational(const char *q, uint32_t alpha, struct QdContext **out);

/**
 * Creates a p-adic context for the odd prime `p` with an exact rational `q`
 * satisfying `|1 - q|_p < 1`.
 *
 * # Safety
 * `q` must be a NUL-terminated string and `out` a valid pointer.
 */
int32_t qd_context_new_padic(uint64_t p,
                             const char *q,
                             uint32_t alpha,
                             uint32_t precision,
                             struct QdContext **out);

/**
 * Switches the interpolation sums to the alternative printed summand.
 *
 * # Safety
 * `ctx` must come from `qd_context_new_*` and not be freed.
 */
int32_t qd_context_set_literal(struct QdContext *ctx, bool on);

/**
 * Releases a context. Null is ignored.
 *
 * # Safety
 * `ctx` must come from `qd_context_new_*` and not be used afterwards.
 */
void qd_context_free(struct QdContext *ctx);

/**
 * `G~_n` as text (`"n/d"` or a p-adic expansion).
 *
 * # Safety
 * `ctx` must be a live handle and `out` a valid pointer.
 */
int32_t qd_g_number(const struct QdContext *ctx, uint64_t n, char **out);

/**
 * `G~_{n, q^N}(a/N)`.
 *
 * # Safety
 * `ctx` must be a live handle and `out` a valid pointer.
 */
int32_t qd_g_poly_scaled(const struct QdContext *ctx,
                         uint64_t n,
                         int64_t a,
                         uint32_t big_n,
                         char **out);

/**
 * `S_m(h,k)`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
int32_t qd_dc_sum(uint64_t m, uint64_t h, uint64_t k, char **out);

/**
 * `Y~_m(h,k : q^l)`.
 *
 * # Safety
 * `ctx` must be a live handle and `out` a valid pointer.
 */
int32_t qd_y_tilde(const struct QdContext *ctx,
                   uint64_t m,
                   uint64_t h,
                   uint64_t k,
                   uint64_t l,
                   char **out);

/**
 * p-adic Dedekind-type sum `sum_M (-1)^(M-1) [M] A~(m, (hM)_k, k)`.
 *
 * # Safety
 * `ctx` must be a live handle and `out` a valid pointer.
 */
int32_t qd_dc_padic(const struct QdContext *ctx, uint64_t m, uint64_t h, uint64_t k, char **out);

/**
 * Runs the comma-separated `suites` (or `"all"`) and writes the JSON
 * report array to `out_json`. Returns `QD_ERR_VERIFY` if any check fails;
 * the report is written in that case too.
 *
 * # Safety
 * `suites` must be a NUL-terminated string and `out_json` a valid pointer.
 */
int32_t qd_verify(const char *suites, uint64_t seed, char **out_json);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void qd_string_free(char *s);

/**
 * Message for the last failure on this thread, or an empty string. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *qd_last_error(void);

/**
 * Static description of a status code.
 */
const char *qd_status_message(int32_t status);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QDEDE_H */

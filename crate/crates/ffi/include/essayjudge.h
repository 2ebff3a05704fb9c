#ifndef ESSAYJUDGE_H
#define ESSAYJUDGE_H

/* Generated by cbindgen from essayjudge-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum EjStatus {
  /**
   * Success.
   */
  EJ_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  EJ_STATUS_NULL_POINTER = 1,
  /**
   * An argument violated a documented precondition.
   */
  EJ_STATUS_CONTRACT = 2,
  /**
   * The tournament is missing verdicts for some pairs.
   */
  EJ_STATUS_INCOMPLETE = 3,
} EjStatus;

/**
 * An in-progress round-robin tournament over `n` essays.
 */
typedef struct EjTournament EjTournament;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the most recent failure on this thread. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *ej_last_error(void);

/**
 * Library version as a static string.
 */
const char *ej_version(void);

/**
 * Allocate a tournament over `n_essays` essays (at least 2). Returns null on
 * invalid input. Free with [`ej_tournament_free`].
 */
struct EjTournament *ej_tournament_new(size_t n_essays);

/**
 * # Safety
 * `tournament` must be a pointer from [`ej_tournament_new`] not yet freed.
 */
void ej_tournament_free(struct EjTournament *tournament);

/**
 * Record the verdict for the pair `(first, second)`: `value` in -2..=2,
 * positive meaning `first` is superior. Requires `first < second < n`.
 *
 * # Safety
 * `tournament` must be a live handle from [`ej_tournament_new`].
 */
enum EjStatus ej_tournament_set_verdict(struct EjTournament *tournament,
                                        size_t first,
                                        size_t second,
                                        int32_t value);

/**
 * Whether every pair has a verdict.
 *
 * # Safety
 * `tournament` must be a live handle or null (null reports false).
 */
bool ej_tournament_is_complete(const struct EjTournament *tournament);

/**
 * Write each essay's tournament sum into `out[0..len]`; `len` must equal the
 * essay count.
 *
 * # Safety
 * `tournament` must be a live handle; `out` must point to `len` writable i64.
 */
enum EjStatus ej_tournament_sums(const struct EjTournament *tournament, int64_t *out, size_t len);

/**
 * Grade every essay of a complete tournament onto `[floor, ceiling]` and
 * write the grades into `out[0..len]`.
 *
 * # Safety
 * `tournament` must be a live handle; `out` must point to `len` writable f64.
 */
enum EjStatus ej_tournament_grades(const struct EjTournament *tournament,
                                   double floor,
                                   double ceiling,
                                   double *out,
                                   size_t len);

/**
 * Fraction of verdicts whose sign disagrees with the final grade ordering
 * of a complete tournament.
 *
 * # Safety
 * `tournament` must be a live handle; `out_rate` must be writable.
 */
enum EjStatus ej_tournament_discordance(const struct EjTournament *tournament,
                                        double floor,
                                        double ceiling,
                                        double *out_rate);

/**
 * Normalize a tournament sum over the attainable range for `n_essays`
 * essays into [0, 1].
 *
 * # Safety
 * `out` must be writable.
 */
enum EjStatus ej_normalize_sum(int64_t sum, size_t n_essays, double *out);

/**
 * Map a normalized score in [0, 1] onto `[floor, ceiling]`.
 *
 * # Safety
 * `out` must be writable.
 */
enum EjStatus ej_grade_from_normalized(double x, double floor, double ceiling, double *out);

/**
 * Sample Pearson correlation of two series of `len` paired values
 * (`len >= 3`, neither constant).
 *
 * # Safety
 * `xs` and `ys` must point to `len` readable f64; `out_r` must be writable.
 */
enum EjStatus ej_pearson(const double *xs, const double *ys, size_t len, double *out_r);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ESSAYJUDGE_H */

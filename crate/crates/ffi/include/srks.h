#ifndef SRKS_H
#define SRKS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum SrksStatus {
  SRKS_STATUS_OK = 0,
  /**
   * Malformed text, violated precondition or out-of-range index.
   */
  SRKS_STATUS_INVALID_INPUT = 1,
  /**
   * An enumeration would exceed the caller's budget.
   */
  SRKS_STATUS_BUDGET_EXCEEDED = 2,
  /**
   * The maxent target is on the boundary of or outside the polytope.
   */
  SRKS_STATUS_BOUNDARY_OR_INFEASIBLE = 3,
  SRKS_STATUS_NOT_CONVERGED = 4,
  /**
   * The computation finished but a checked identity or bound failed.
   * A report is still produced when the call has one.
   */
  SRKS_STATUS_CHECK_FAILED = 5,
  SRKS_STATUS_NUMERICAL_FAILURE = 6,
  SRKS_STATUS_NULL_POINTER = 7,
  SRKS_STATUS_INVALID_UTF8 = 8,
  /**
   * The caller's buffer has the wrong length.
   */
  SRKS_STATUS_BUFFER_SIZE = 9,
  SRKS_STATUS_PANIC = 10,
} SrksStatus;

/**
 * A finite distribution on subsets of `{0, .., m-1}`.
 */
typedef struct SrksDistribution SrksDistribution;

/**
 * A weighted undirected graph.
 */
typedef struct SrksGraph SrksGraph;

/**
 * A JSON report owned by the library.
 */
typedef struct SrksReport SrksReport;

/**
 * A list of vectors in `Q^d`.
 */
typedef struct SrksVectors SrksVectors;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *srks_version(void);

/**
 * Message for the last failed call on this thread, or NULL.
 *
 * The pointer stays valid until the next `srks_*` call on the same thread.
 */
const char *srks_last_error(void);

/**
 * Parses a distribution from JSON: `{"m": .., "support": [{"set": [..], "p": "a/b"}, ..]}`.
 *
 * # Safety
 * `json` must be NUL-terminated; `out` must be writable.
 */
enum SrksStatus srks_distribution_from_json(const char *json, struct SrksDistribution **out);

/**
 * Size of the ground set.
 *
 * # Safety
 * `dist` must be a live handle or NULL (which yields 0).
 */
size_t srks_distribution_ground_size(const struct SrksDistribution *dist);

/**
 * # Safety
 * `dist` must come from `srks_distribution_from_json` and not be freed twice.
 */
void srks_distribution_free(struct SrksDistribution *dist);

/**
 * Parses vectors: header `d m`, then one vector of `d` rationals per line.
 *
 * # Safety
 * `text_in` must be NUL-terminated; `out` must be writable.
 */
enum SrksStatus srks_vectors_parse(const char *text_in, struct SrksVectors **out);

/**
 * Number of vectors.
 *
 * # Safety
 * `vs` must be a live handle or NULL (which yields 0).
 */
size_t srks_vectors_len(const struct SrksVectors *vs);

/**
 * Ambient dimension.
 *
 * # Safety
 * `vs` must be a live handle or NULL (which yields 0).
 */
size_t srks_vectors_dim(const struct SrksVectors *vs);

/**
 * # Safety
 * `vs` must come from `srks_vectors_parse` and not be freed twice.
 */
void srks_vectors_free(struct SrksVectors *vs);

/**
 * Parses an edge list: one `u v [w]` per line, 0-indexed, `#` comments.
 *
 * # Safety
 * `text_in` must be NUL-terminated; `out` must be writable.
 */
enum SrksStatus srks_graph_parse(const char *text_in, struct SrksGraph **out);

/**
 * Number of edges.
 *
 * # Safety
 * `graph` must be a live handle or NULL (which yields 0).
 */
size_t srks_graph_edge_count(const struct SrksGraph *graph);

/**
 * # Safety
 * `graph` must come from `srks_graph_parse` and not be freed twice.
 */
void srks_graph_free(struct SrksGraph *graph);

/**
 * The report's JSON text. Valid until the report is freed.
 *
 * # Safety
 * `report` must be a live handle or NULL (which yields NULL).
 */
const char *srks_report_json(const struct SrksReport *report);

/**
 * # Safety
 * `report` must come from this library and not be freed twice.
 */
void srks_report_free(struct SrksReport *report);

/**
 * Computes the mixed characteristic polynomial by enumeration, by the
 * operator formula and in closed form, and compares them exactly.
 *
 * Returns `SRKS_STATUS_CHECK_FAILED` with a report when they disagree or
 * the polynomial is not real-rooted.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum SrksStatus srks_verify_identity(const struct SrksDistribution *dist,
                                     const struct SrksVectors *vs,
                                     struct SrksReport **out);

/**
 * Runs the interlacing descent and reports the chosen subset.
 *
 * Returns `SRKS_STATUS_CHECK_FAILED` with a report when the subset
 * violates the norm bound.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum SrksStatus srks_descend(const struct SrksDistribution *dist,
                             const struct SrksVectors *vs,
                             double tol,
                             struct SrksReport **out);

/**
 * Certificate for an isotropic input with small marginals and norms.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum SrksStatus srks_main_certificate(const struct SrksDistribution *dist,
                                      const struct SrksVectors *vs,
                                      double tol,
                                      struct SrksReport **out);

/**
 * Splits an isotropic frame into `r` parts with small partial frames.
 *
 * # Safety
 * `vs` must be live; `out` must be writable.
 */
enum SrksStatus srks_ksr_partition(const struct SrksVectors *vs,
                                   size_t r,
                                   double tol,
                                   uint64_t budget,
                                   struct SrksReport **out);

/**
 * Fits `λ` so the determinantal measure has marginals `target[0..len]`.
 *
 * # Safety
 * `vs` must be live; `target` must point to `len` doubles; `out` must be writable.
 */
enum SrksStatus srks_fit_lambda(const struct SrksVectors *vs,
                                const double *target,
                                size_t len,
                                double tol,
                                size_t max_iter,
                                struct SrksReport **out);

/**
 * Writes the effective resistance of every edge into `out[0..len]`.
 * `len` must equal the edge count.
 *
 * # Safety
 * `graph` must be live; `out` must point to `len` writable doubles.
 */
enum SrksStatus srks_effective_resistances(const struct SrksGraph *graph, double *out, size_t len);

/**
 * Finds a thin spanning tree of the whole graph.
 *
 * # Safety
 * `graph` must be live; `out` must be writable.
 */
enum SrksStatus srks_thin_tree(const struct SrksGraph *graph,
                               double eps_target,
                               uint64_t seed,
                               uint64_t budget,
                               struct SrksReport **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SRKS_H */

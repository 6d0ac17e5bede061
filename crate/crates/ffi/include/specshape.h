#ifndef SPECSHAPE_H
#define SPECSHAPE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SpecshapeStatus {
  SPECSHAPE_STATUS_OK = 0,
  SPECSHAPE_STATUS_NULL_POINTER = 1,
  SPECSHAPE_STATUS_INVALID_ARGUMENT = 2,
  SPECSHAPE_STATUS_DEGENERATE = 3,
  SPECSHAPE_STATUS_UNSUPPORTED = 4,
  SPECSHAPE_STATUS_CONTRACT = 5,
  SPECSHAPE_STATUS_NUMERIC = 6,
  SPECSHAPE_STATUS_FORMAT = 7,
  SPECSHAPE_STATUS_IO = 8,
  SPECSHAPE_STATUS_PANIC = 9,
} SpecshapeStatus;

typedef enum SpecshapeLaplacian {
  SPECSHAPE_LAPLACIAN_COMBINATORIAL = 0,
  SPECSHAPE_LAPLACIAN_NORMALIZED = 1,
} SpecshapeLaplacian;

/**
 * A shaped filter bank.
 */
typedef struct SpecshapeBank SpecshapeBank;

/**
 * A graph together with its Laplacian.
 */
typedef struct SpecshapeGraph SpecshapeGraph;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *specshape_version(void);

/**
 * Message for the last failed call on this thread; empty after a success.
 * Valid until the next call into the library on the same thread.
 */
const char *specshape_last_error(void);

/**
 * Build a graph from `num_edges` weighted edges.
 *
 * # Safety
 * `us`, `vs` and `weights` must each point to `num_edges` readable values;
 * `out` must be writable.
 */
enum SpecshapeStatus specshape_graph_from_edges(size_t num_nodes,
                                                const size_t *us,
                                                const size_t *vs,
                                                const double *weights,
                                                size_t num_edges,
                                                enum SpecshapeLaplacian kind,
                                                struct SpecshapeGraph **out);

/**
 * Draw a graph from a generator given as JSON, e.g.
 * `{"family": "erdos_renyi", "n": 32, "p": 0.3}`.
 *
 * # Safety
 * `family_json` must be a NUL-terminated string; `out` must be writable.
 */
enum SpecshapeStatus specshape_graph_generate(const char *family_json,
                                              enum SpecshapeLaplacian kind,
                                              uint64_t seed,
                                              struct SpecshapeGraph **out);

/**
 * # Safety
 * `graph` must be a live handle or null.
 */
size_t specshape_graph_num_nodes(const struct SpecshapeGraph *graph);

/**
 * Upper bound on the Laplacian spectrum used for filtering; NaN for a null handle.
 *
 * # Safety
 * `graph` must be a live handle or null.
 */
double specshape_graph_lambda_max(const struct SpecshapeGraph *graph);

/**
 * # Safety
 * `graph` must come from this library and not be used afterwards. Null is ignored.
 */
void specshape_graph_free(struct SpecshapeGraph *graph);

/**
 * Fresh bank with `k` shaping components and the default baseline network.
 *
 * # Safety
 * `out` must be writable.
 */
enum SpecshapeStatus specshape_bank_new(size_t k,
                                        double lambda_max,
                                        uint64_t seed,
                                        struct SpecshapeBank **out);

/**
 * Load a bank from its JSON document (as written by checkpoints or
 * [`specshape_bank_to_json`]).
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum SpecshapeStatus specshape_bank_from_json(const char *json, struct SpecshapeBank **out);

/**
 * Serialize a bank. The string must be released with [`specshape_string_free`].
 *
 * # Safety
 * `bank` must be a live handle; `out` must be writable.
 */
enum SpecshapeStatus specshape_bank_to_json(const struct SpecshapeBank *bank, char **out);

/**
 * # Safety
 * `bank` must be a live handle or null.
 */
size_t specshape_bank_num_components(const struct SpecshapeBank *bank);

/**
 * Total response at `len` frequencies.
 *
 * # Safety
 * `bank` must be a live handle; `lambdas` and `out` must each hold `len` values.
 */
enum SpecshapeStatus specshape_bank_eval(const struct SpecshapeBank *bank,
                                         const double *lambdas,
                                         size_t len,
                                         double *out);

/**
 * # Safety
 * `bank` must come from this library and not be used afterwards. Null is ignored.
 */
void specshape_bank_free(struct SpecshapeBank *bank);

/**
 * Filter `num_signals` column-major signals on a graph with a bank's response.
 * `degree == 0` selects exact filtering through an eigendecomposition;
 * otherwise a Chebyshev expansion of that degree is used, with Jackson damping
 * when `jackson` is true.
 *
 * # Safety
 * Handles must be live; `x` and `y` must each hold `num_nodes * num_signals`
 * values, where `num_nodes` is the graph's node count. `y` may not alias `x`.
 */
enum SpecshapeStatus specshape_filter_apply(const struct SpecshapeBank *bank,
                                            const struct SpecshapeGraph *graph,
                                            size_t degree,
                                            bool jackson,
                                            const double *x,
                                            size_t num_signals,
                                            double *y);

/**
 * # Safety
 * `s` must come from this library and not be used afterwards. Null is ignored.
 */
void specshape_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPECSHAPE_H */

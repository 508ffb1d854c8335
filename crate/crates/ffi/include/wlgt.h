#ifndef WLGT_H
#define WLGT_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum WlgtStatus {
  WLGT_STATUS_OK = 0,
  WLGT_STATUS_NULL_POINTER = 1,
  WLGT_STATUS_INVALID_UTF8 = 2,
  /**
   * Malformed graph, unknown pair, invalid order or variant mismatch.
   */
  WLGT_STATUS_INVALID_INPUT = 3,
  /**
   * Size, memory or iteration cap exceeded.
   */
  WLGT_STATUS_RESOURCE_LIMIT = 4,
  /**
   * A verification ran but did not pass.
   */
  WLGT_STATUS_FAILED = 5,
  WLGT_STATUS_PANIC = 6,
} WlgtStatus;

typedef enum WlgtVariant {
  WLGT_VARIANT_KWL = 0,
  WLGT_VARIANT_DELTA_KWL = 1,
  WLGT_VARIANT_DELTA_KLWL = 2,
  WLGT_VARIANT_KS_LWL = 3,
} WlgtVariant;

/**
 * Opaque graph handle.
 */
typedef struct WlgtGraph WlgtGraph;

typedef struct WlgtVerdict {
  bool distinguished;
  /**
   * First iteration whose histograms differ, or -1.
   */
  int64_t at_iteration;
} WlgtVerdict;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *wlgt_last_error_message(void);

/**
 * Parses a graph JSON document into a new handle.
 *
 * # Safety
 * `json` must be a nul-terminated string and `out` a valid pointer.
 */
enum WlgtStatus wlgt_graph_from_json(const char *json, struct WlgtGraph **out);

/**
 * Creates handles for both graphs of a built-in pair.
 *
 * # Safety
 * `name` must be a nul-terminated string; `g1` and `g2` valid pointers.
 */
enum WlgtStatus wlgt_builtin_pair(const char *name, struct WlgtGraph **g1, struct WlgtGraph **g2);

/**
 * Releases a graph handle. Null is ignored.
 *
 * # Safety
 * `g` must come from this library and not be used afterwards.
 */
void wlgt_graph_free(struct WlgtGraph *g);

/**
 * Number of nodes, or 0 for a null handle.
 *
 * # Safety
 * `g` must be null or a live handle.
 */
size_t wlgt_graph_num_nodes(const struct WlgtGraph *g);

/**
 * Refines both graphs side by side and reports whether they separate.
 *
 * # Safety
 * `g` and `h` must be live handles and `out` a valid pointer.
 */
enum WlgtStatus wlgt_distinguish(const struct WlgtGraph *g,
                                 const struct WlgtGraph *h,
                                 enum WlgtVariant variant,
                                 size_t k,
                                 size_t s,
                                 struct WlgtVerdict *out);

/**
 * Refines to a stable coloring and writes the report as JSON.
 *
 * # Safety
 * `g` must be a live handle and `out_json` a valid pointer; the string
 * must be released with [`wlgt_string_free`].
 */
enum WlgtStatus wlgt_refine_json(const struct WlgtGraph *g,
                                 enum WlgtVariant variant,
                                 size_t k,
                                 size_t s,
                                 char **out_json);

/**
 * Runs the constructed transformer against WL refinement. `layers = 0`
 * runs until the coloring is stable. Writes the report either way and
 * returns [`WlgtStatus::Failed`] if some layer disagrees.
 *
 * # Safety
 * `g` must be a live handle and `out_json` a valid pointer; the string
 * must be released with [`wlgt_string_free`].
 */
enum WlgtStatus wlgt_simulate_json(const struct WlgtGraph *g,
                                   enum WlgtVariant variant,
                                   size_t k,
                                   size_t s,
                                   size_t layers,
                                   double temperature,
                                   char **out_json);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void wlgt_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WLGT_H */

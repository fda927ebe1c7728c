#ifndef PROOFSCOPE_H
#define PROOFSCOPE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum PsStatus {
  PS_STATUS_OK = 0,
  PS_STATUS_NULL_POINTER = 1,
  PS_STATUS_INVALID_UTF8 = 2,
  PS_STATUS_PARSE_ERROR = 3,
  PS_STATUS_INVALID_ARGUMENT = 4,
  PS_STATUS_CLUSTER_ERROR = 5,
  PS_STATUS_GRAPH_ERROR = 6,
  PS_STATUS_REPORT_ERROR = 7,
  PS_STATUS_PANIC = 8,
} PsStatus;

/**
 * Opaque parsed corpus.
 */
typedef struct PsCorpus PsCorpus;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses and validates corpus text. On success `*out` holds a new handle.
 *
 * # Safety
 * `text` must be a nul-terminated string and `out` a valid pointer.
 */
enum PsStatus ps_corpus_parse(const char *text, struct PsCorpus **out);

/**
 * Handle to the bundled sample corpus.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum PsStatus ps_corpus_bundled(struct PsCorpus **out);

/**
 * Releases a corpus handle. Null is ignored.
 *
 * # Safety
 * `corpus` must come from this library and not be used afterwards.
 */
void ps_corpus_free(struct PsCorpus *corpus);

/**
 * Number of entries, or 0 for a null handle.
 *
 * # Safety
 * `corpus` must be null or a live handle.
 */
size_t ps_corpus_entry_count(const struct PsCorpus *corpus);

/**
 * Recurrent statement clustering; writes the partition JSON to `*out_json`.
 * `clusters > 0` overrides `granularity`.
 *
 * # Safety
 * `corpus` must be a live handle and `out_json` a valid pointer.
 */
enum PsStatus ps_cluster_terms(const struct PsCorpus *corpus,
                               uint8_t granularity,
                               uint32_t clusters,
                               uint32_t max_iters,
                               char **out_json);

/**
 * Proof clustering, with terms encoded by a recurrent statement clustering at
 * the same cut. Writes the partition JSON to `*out_json`.
 *
 * # Safety
 * `corpus` must be a live handle and `out_json` a valid pointer.
 */
enum PsStatus ps_cluster_proofs(const struct PsCorpus *corpus,
                                uint8_t granularity,
                                uint32_t clusters,
                                uint32_t max_iters,
                                char **out_json);

/**
 * Dependency graph DOT of `root`, or of the whole corpus when `root` is null.
 *
 * # Safety
 * `corpus` must be a live handle, `root` null or nul-terminated, `out_dot` valid.
 */
enum PsStatus ps_depgraph_dot(const struct PsCorpus *corpus, const char *root, char **out_dot);

/**
 * Library import graph DOT.
 *
 * # Safety
 * `corpus` must be a live handle and `out_dot` a valid pointer.
 */
enum PsStatus ps_libgraph_dot(const struct PsCorpus *corpus, char **out_dot);

/**
 * Plain-text report of the statement clustering at `granularity`.
 *
 * # Safety
 * `corpus` must be a live handle and `out_text` a valid pointer.
 */
enum PsStatus ps_text_report(const struct PsCorpus *corpus, uint8_t granularity, char **out_text);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void ps_string_free(char *s);

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *ps_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PROOFSCOPE_H */

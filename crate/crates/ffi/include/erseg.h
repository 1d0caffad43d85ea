#ifndef ERSEG_H
#define ERSEG_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result of a fallible call. Zero is success; errors are negative.
 */
typedef enum ErsegStatus {
  ERSEG_STATUS_OK = 0,
  ERSEG_STATUS_NULL_POINTER = -1,
  ERSEG_STATUS_INVALID_UTF8 = -2,
  ERSEG_STATUS_INVALID_CONFIG = -3,
  ERSEG_STATUS_EMPTY_INPUT = -4,
  ERSEG_STATUS_FORMAT = -5,
  ERSEG_STATUS_TREE_PARSE = -6,
  ERSEG_STATUS_ALIGNMENT = -7,
  ERSEG_STATUS_OUT_OF_RANGE = -8,
  ERSEG_STATUS_METRIC = -9,
  ERSEG_STATUS_BUFFER_TOO_SMALL = -10,
  ERSEG_STATUS_INTERNAL = -99,
} ErsegStatus;

/*
 A segmented sentence.
 */
typedef struct ErsegPath ErsegPath;

/*
 A parsed bracketed tree.
 */
typedef struct ErsegTree ErsegTree;

/*
 Segmentation window and search parameters.
 */
typedef struct ErsegConfig {
  size_t min_words;
  size_t max_words;
  size_t beam_width;
  double penalty;
} ErsegConfig;

/*
 Corpus-level evaluation scores, all on a 0-100 scale.
 */
typedef struct ErsegMetrics {
  size_t sentences;
  /*
   False when Sigma is undefined; `sigma` is then 0.
   */
  bool sigma_defined;
  double sigma;
  double bleu_upper;
  double bleu_br;
  double bleu_nb;
  double precision;
  double recall;
  double f1;
  double text_preserved_pct;
} ErsegMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Library version as a static NUL-terminated string.
 */
const char *erseg_version(void);

/*
 Copy of the last error message on this thread, or NULL if the last call
 succeeded. Free with `erseg_string_free`.
 */
char *erseg_last_error_message(void);

/*
 # Safety
 `s` must be NULL or a string returned by this library.
 */
void erseg_string_free(char *s);

/*
 Window 5-15, beam 5, penalty 0.
 */
struct ErsegConfig erseg_config_default(void);

/*
 Segment whitespace-tokenized `text` using one gap score per token.

 # Safety
 `text` must be a NUL-terminated string, `scores` must point to
 `n_scores` doubles, `config` must be valid and `out` writable.
 */
enum ErsegStatus erseg_segment(const char *text,
                               const double *scores,
                               size_t n_scores,
                               const struct ErsegConfig *config,
                               struct ErsegPath **out);

/*
 # Safety
 `path` must be NULL or a handle from `erseg_segment` not yet freed.
 */
void erseg_path_free(struct ErsegPath *path);

/*
 Number of segments, or 0 for a NULL handle.

 # Safety
 `path` must be NULL or a live handle.
 */
size_t erseg_path_segment_count(const struct ErsegPath *path);

/*
 Mean segment score of the path, or NaN for a NULL handle.

 # Safety
 `path` must be NULL or a live handle.
 */
double erseg_path_score(const struct ErsegPath *path);

/*
 Exclusive token end of segment `index`.

 # Safety
 `path` must be a live handle and `end` writable.
 */
enum ErsegStatus erseg_path_segment_end(const struct ErsegPath *path, size_t index, size_t *end);

/*
 The sentence with `marker` between segments (the default marker when
 `marker` is NULL). Free with `erseg_string_free`; NULL on error.

 # Safety
 `path` must be a live handle; `marker` NULL or a NUL-terminated string.
 */
char *erseg_path_to_line(const struct ErsegPath *path, const char *marker);

/*
 Parse one bracketed tree such as `(S (NP (DT the) (NN dog)) (VP ran))`.

 # Safety
 `text` must be a NUL-terminated string and `out` writable.
 */
enum ErsegStatus erseg_tree_parse(const char *text, struct ErsegTree **out);

/*
 # Safety
 `tree` must be NULL or a handle from `erseg_tree_parse` not yet freed.
 */
void erseg_tree_free(struct ErsegTree *tree);

/*
 # Safety
 `tree` must be NULL or a live handle.
 */
size_t erseg_tree_leaf_count(const struct ErsegTree *tree);

/*
 Number of edges between leaves `i` and `j`.

 # Safety
 `tree` must be a live handle and `distance` writable.
 */
enum ErsegStatus erseg_tree_leaf_distance(const struct ErsegTree *tree,
                                          size_t i,
                                          size_t j,
                                          size_t *distance);

/*
 Normalized gap scores of `sentence` under `tree`, one per token.

 `*len` receives the token count. When `capacity` is smaller the call
 returns `BufferTooSmall` and writes nothing else, so callers can size
 the buffer with a first call passing `capacity` 0.

 # Safety
 `tree` must be a live handle, `sentence` NUL-terminated, `scores` valid
 for `capacity` doubles (or NULL when `capacity` is 0) and `len` writable.
 */
enum ErsegStatus erseg_tree_gap_scores(const struct ErsegTree *tree,
                                       const char *sentence,
                                       double *scores,
                                       size_t capacity,
                                       size_t *len);

/*
 Score hypothesis against reference corpora given as newline-separated
 marker-format text (the default marker when `marker` is NULL).

 # Safety
 `hyp` and `reference` must be NUL-terminated, `marker` NULL or
 NUL-terminated, and `out` writable.
 */
enum ErsegStatus erseg_evaluate(const char *hyp,
                                const char *reference,
                                const char *marker,
                                struct ErsegMetrics *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ERSEG_H */

#ifndef GRAFTOK_H
#define GRAFTOK_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GraftokStatus {
  GRAFTOK_STATUS_OK = 0,
  GRAFTOK_STATUS_NULL_POINTER = 1,
  GRAFTOK_STATUS_IO = 2,
  GRAFTOK_STATUS_INVALID_UTF8 = 3,
  GRAFTOK_STATUS_FINGERPRINT_MISMATCH = 4,
  GRAFTOK_STATUS_UNKNOWN_LANGUAGE = 5,
  GRAFTOK_STATUS_UNKNOWN_TOKEN_ID = 6,
  GRAFTOK_STATUS_INVALID_BYTE_SEQUENCE = 7,
  GRAFTOK_STATUS_MISSING_SPECIAL_TOKEN = 8,
  GRAFTOK_STATUS_UNSUPPORTED_TASK = 9,
  GRAFTOK_STATUS_MALFORMED_TOKENIZER = 10,
  GRAFTOK_STATUS_BUFFER_TOO_SMALL = 11,
  GRAFTOK_STATUS_PANIC = 12,
  GRAFTOK_STATUS_OTHER = 13,
} GraftokStatus;

/**
 * Opaque tokenizer handle.
 */
typedef struct GraftokTokenizer GraftokTokenizer;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *graftok_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *graftok_version(void);

/**
 * Loads the bundled GPT-2 tokenizer.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum GraftokStatus graftok_tokenizer_load_base(struct GraftokTokenizer **out);

/**
 * Loads `vocab.json`, `merges.txt` and `added_tokens.json` from a directory.
 *
 * # Safety
 * `dir` must be a NUL-terminated string; `out` must be valid for one write.
 */
enum GraftokStatus graftok_tokenizer_load_dir(const char *dir, struct GraftokTokenizer **out);

/**
 * Replaces the handle's language-family map with the JSON in `json`.
 *
 * # Safety
 * `tok` must come from a `graftok_tokenizer_load_*` call; `json` must be a
 * NUL-terminated string.
 */
enum GraftokStatus graftok_tokenizer_set_families(struct GraftokTokenizer *tok, const char *json);

/**
 * # Safety
 * `tok` must be null or a handle not yet freed.
 */
void graftok_tokenizer_free(struct GraftokTokenizer *tok);

/**
 * Number of tokens, specials included. Returns 0 for a null handle.
 *
 * # Safety
 * `tok` must be null or a live handle.
 */
size_t graftok_tokenizer_vocab_size(const struct GraftokTokenizer *tok);

/**
 * Encodes UTF-8 text. Special-token names are treated as plain text.
 *
 * # Safety
 * `text` must be readable for `len` bytes, `out_ids` writable for `cap` ids,
 * `out_len` valid for one write.
 */
enum GraftokStatus graftok_encode(const struct GraftokTokenizer *tok,
                                  const uint8_t *text,
                                  size_t len,
                                  uint32_t *out_ids,
                                  size_t cap,
                                  size_t *out_len);

/**
 * # Safety
 * `text` must be readable for `len` bytes and `out_count` valid for one write.
 */
enum GraftokStatus graftok_token_count(const struct GraftokTokenizer *tok,
                                       const uint8_t *text,
                                       size_t len,
                                       size_t *out_count);

/**
 * Decodes ids to UTF-8 bytes (not NUL-terminated). With `lossy` false,
 * output that is not valid UTF-8 is an error; otherwise it is repaired with
 * U+FFFD.
 *
 * # Safety
 * `ids` must be readable for `n` ids, `out` writable for `cap` bytes,
 * `out_len` valid for one write.
 */
enum GraftokStatus graftok_decode(const struct GraftokTokenizer *tok,
                                  const uint32_t *ids,
                                  size_t n,
                                  bool lossy,
                                  uint8_t *out,
                                  size_t cap,
                                  size_t *out_len);

/**
 * Builds the transcription prompt for `language`.
 *
 * # Safety
 * `language` must be a NUL-terminated string, `out_ids` writable for `cap`
 * ids, `out_len` valid for one write.
 */
enum GraftokStatus graftok_build_prompt(const struct GraftokTokenizer *tok,
                                        const char *language,
                                        bool use_family_prompt,
                                        bool timestamps,
                                        uint32_t *out_ids,
                                        size_t cap,
                                        size_t *out_len);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* GRAFTOK_H */

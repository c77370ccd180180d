#ifndef DEFGEO_H
#define DEFGEO_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum DgStatus {
  DG_STATUS_OK = 0,
  DG_STATUS_NULL_ARGUMENT = 1,
  DG_STATUS_INVALID_UTF8 = 2,
  DG_STATUS_SYNTAX = 3,
  DG_STATUS_ARITY = 4,
  DG_STATUS_UNIVERSE_MISMATCH = 5,
  DG_STATUS_MODE_MISMATCH = 6,
  DG_STATUS_GUARD = 7,
  DG_STATUS_INVALID = 8,
  DG_STATUS_PANIC = 9,
} DgStatus;

/**
 * A parsed formula class, bound to the structure it was parsed against.
 */
typedef struct DgSpec DgSpec;

/**
 * A parsed structure.
 */
typedef struct DgStructure DgStructure;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses a structure file's text into a new handle.
 *
 * # Safety
 * `source` is a NUL-terminated string; `out` points to writable storage.
 */
enum DgStatus dg_structure_parse(const char *source, struct DgStructure **out);

/**
 * Releases a structure handle. Null is ignored.
 *
 * # Safety
 * `s` is null or a handle from [`dg_structure_parse`] not yet freed.
 */
void dg_structure_free(struct DgStructure *s);

/**
 * Universe size of a structure, 0 for a null handle.
 *
 * # Safety
 * `s` is null or a live handle.
 */
uint32_t dg_structure_universe_size(const struct DgStructure *s);

/**
 * Parses a spec file's text against `structure`.
 *
 * # Safety
 * `structure` is a live handle, `source` a NUL-terminated string, `out` writable.
 */
enum DgStatus dg_spec_parse(const struct DgStructure *structure,
                            const char *source,
                            struct DgSpec **out);

/**
 * Releases a spec handle. Null is ignored.
 *
 * # Safety
 * `spec` is null or a handle from [`dg_spec_parse`] not yet freed.
 */
void dg_spec_free(struct DgSpec *spec);

/**
 * Solution set of `formula` at `arity`, as canonical relation text.
 *
 * # Safety
 * Handles are live, `formula` is NUL-terminated, `out` writable.
 */
enum DgStatus dg_eval(const struct DgStructure *structure,
                      const char *formula,
                      size_t arity,
                      char **out);

/**
 * Canonical fingerprint text at the comparison arity.
 *
 * # Safety
 * Handles are live and `out` writable.
 */
enum DgStatus dg_fingerprint(const struct DgStructure *structure,
                             const struct DgSpec *spec,
                             char **out);

/**
 * Whether two structures define the same sets. On inequivalence, when
 * `witness` is not null, it receives a relation in exactly one family and
 * `witness_in_first` (if not null) says which.
 *
 * # Safety
 * Handles are live; `equivalent` is writable; `witness` and
 * `witness_in_first` are null or writable.
 */
enum DgStatus dg_equivalent(const struct DgStructure *structure1,
                            const struct DgSpec *spec1,
                            const struct DgStructure *structure2,
                            const struct DgSpec *spec2,
                            bool *equivalent,
                            char **witness,
                            bool *witness_in_first);

/**
 * Equational-domain check up to `bound`; `passes` receives the verdict.
 *
 * # Safety
 * `structure` is live and `passes` writable.
 */
enum DgStatus dg_edcheck(const struct DgStructure *structure, size_t bound, bool *passes);

/**
 * Whether `relation` (canonical text `rel/K/N:{...}`) is definable at its arity.
 *
 * # Safety
 * Handles are live, `relation` is NUL-terminated, `member` writable.
 */
enum DgStatus dg_member(const struct DgStructure *structure,
                        const struct DgSpec *spec,
                        const char *relation,
                        bool *member);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` is null or a string from this library not yet freed.
 */
void dg_string_free(char *s);

/**
 * Message of the last failed call on this thread, or null after a success.
 * Valid until the next call on the same thread.
 */
const char *dg_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DEFGEO_H */

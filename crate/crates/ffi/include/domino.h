#ifndef DOMINO_H
#define DOMINO_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * External alphabet: outputs only, or input/output pairs.
 */
typedef enum DominoExternal {
  DOMINO_EXTERNAL_OUTPUTS = 0,
  DOMINO_EXTERNAL_INPUT_OUTPUT = 1,
} DominoExternal;

/**
 * Result of every fallible call.
 */
typedef enum DominoStatus {
  DOMINO_STATUS_OK = 0,
  DOMINO_STATUS_NULL_POINTER = 1,
  DOMINO_STATUS_INVALID_UTF8 = 2,
  DOMINO_STATUS_PARSE = 3,
  DOMINO_STATUS_NOT_ACCEPTED = 4,
  DOMINO_STATUS_INVALID_ARGUMENT = 5,
  DOMINO_STATUS_INCOMPATIBLE_ALPHABETS = 6,
  DOMINO_STATUS_INTERNAL = 7,
} DominoStatus;

/**
 * Opaque machine handle.
 */
typedef struct DominoMachine DominoMachine;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses a machine from its JSON form. On success `*out` holds a new handle
 * to release with [`domino_machine_free`].
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a writable pointer.
 */
enum DominoStatus domino_machine_from_json(const char *json, struct DominoMachine **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `machine` must come from this library and not have been freed.
 */
void domino_machine_free(struct DominoMachine *machine);

/**
 * Writes the machine as compact JSON to `*out`.
 *
 * # Safety
 * `machine` must be a live handle and `out` a writable pointer.
 */
enum DominoStatus domino_machine_to_json(const struct DominoMachine *machine, char **out);

/**
 * Writes the number of states to `*out`.
 *
 * # Safety
 * `machine` must be a live handle and `out` a writable pointer.
 */
enum DominoStatus domino_machine_num_states(const struct DominoMachine *machine, size_t *out);

/**
 * Writes the validation report as JSON to `*out`. A machine that is not
 * accepted is a finding, not an error.
 *
 * # Safety
 * `machine` must be a live handle and `out` a writable pointer.
 */
enum DominoStatus domino_machine_validate(const struct DominoMachine *machine, char **out);

/**
 * Builds the window abstraction of length `l` shifted by `m` and stores a
 * new handle in `*out`.
 *
 * # Safety
 * `machine` must be a live handle and `out` a writable pointer.
 */
enum DominoStatus domino_build_window(const struct DominoMachine *machine,
                                      enum DominoExternal external,
                                      size_t l,
                                      size_t m,
                                      struct DominoMachine **out);

/**
 * Builds the quotient abstraction at level `l` and stores a new handle in
 * `*out`.
 *
 * # Safety
 * `machine` must be a live handle and `out` a writable pointer.
 */
enum DominoStatus domino_build_quotient(const struct DominoMachine *machine,
                                        size_t l,
                                        struct DominoMachine **out);

/**
 * Writes the predicate report for lengths `1..=l_max` as JSON to `*out`.
 *
 * # Safety
 * `machine` must be a live handle and `out` a writable pointer.
 */
enum DominoStatus domino_report(const struct DominoMachine *machine,
                                enum DominoExternal external,
                                size_t l_max,
                                char **out);

/**
 * Writes the pairwise comparison of the abstractions at length `l` as JSON
 * to `*out`.
 *
 * # Safety
 * `machine` must be a live handle and `out` a writable pointer.
 */
enum DominoStatus domino_compare(const struct DominoMachine *machine, size_t l, char **out);

/**
 * Writes whether `right` simulates `left` to `*out`.
 *
 * # Safety
 * Both handles must be live and `out` a writable pointer.
 */
enum DominoStatus domino_simulates(const struct DominoMachine *left,
                                   const struct DominoMachine *right,
                                   enum DominoExternal external,
                                   bool *out);

/**
 * Writes whether the behavior of `left` is included in that of `right` to
 * `*out`.
 *
 * # Safety
 * Both handles must be live and `out` a writable pointer.
 */
enum DominoStatus domino_behavior_included(const struct DominoMachine *left,
                                           const struct DominoMachine *right,
                                           enum DominoExternal external,
                                           bool *out);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void domino_string_free(char *s);

/**
 * Message of the last failed call on this thread, or null after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *domino_last_error(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DOMINO_H */

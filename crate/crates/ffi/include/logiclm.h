#ifndef LOGICLM_H
#define LOGICLM_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum LogiclmStatus {
  LOGICLM_STATUS_OK = 0,
  LOGICLM_STATUS_NULL_ARGUMENT = 1,
  LOGICLM_STATUS_INVALID_UTF8 = 2,
  LOGICLM_STATUS_PARSE_FAILED = 3,
  LOGICLM_STATUS_EXECUTION_FAILED = 4,
  LOGICLM_STATUS_INVALID_ARGUMENT = 5,
  LOGICLM_STATUS_PANIC = 6,
} LogiclmStatus;

typedef enum LogiclmKind {
  // Logic program: Predicates / Facts / Rules / Query.
  LOGICLM_KIND_LP = 0,
  // First-order logic: Facts / Query.
  LOGICLM_KIND_FOL = 1,
  // Constraint model: Domain / Variables / Constraints / Query.
  LOGICLM_KIND_CSP = 2,
} LogiclmKind;

typedef enum LogiclmTruth {
  LOGICLM_TRUTH_PROVED = 0,
  LOGICLM_TRUTH_DISPROVED = 1,
  LOGICLM_TRUTH_UNKNOWN = 2,
} LogiclmTruth;

// A parsed formulation.
typedef struct LogiclmProgram LogiclmProgram;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// The message for the last failed call on this thread, or null. The
// pointer stays valid until the next call into this library on the same
// thread.
const char *logiclm_last_error(void);

// Library version as a static string.
const char *logiclm_version(void);

// Parses `text` as a formulation of the given kind. On success `*out`
// receives a new handle. On `ParseFailed` the last error lists every
// diagnostic, one per line.
//
// # Safety
// `text` must be a NUL-terminated string and `out` a valid pointer.
enum LogiclmStatus logiclm_program_parse(enum LogiclmKind kind,
                                         const char *text,
                                         struct LogiclmProgram **out);

// Releases a handle. Null is ignored.
//
// # Safety
// `program` must come from [`logiclm_program_parse`] and not be used again.
void logiclm_program_free(struct LogiclmProgram *program);

// Canonical text of the program; free it with [`logiclm_string_free`].
//
// # Safety
// `program` must be a live handle and `out` a valid pointer.
enum LogiclmStatus logiclm_program_print(const struct LogiclmProgram *program, char **out);

// Answers the query of a logic program or first-order formulation with
// default limits.
//
// # Safety
// `program` must be a live handle and `out` a valid pointer.
enum LogiclmStatus logiclm_program_query(const struct LogiclmProgram *program,
                                         enum LogiclmTruth *out);

// Evaluates the lettered option (`'A'`, `'B'`, ...) of a constraint model
// over all of its solutions.
//
// # Safety
// `program` must be a live handle and `out` a valid pointer.
enum LogiclmStatus logiclm_program_evaluate_option(const struct LogiclmProgram *program,
                                                   char letter,
                                                   enum LogiclmTruth *out);

// Number of solutions of a constraint model, failing past `max_solutions`.
//
// # Safety
// `program` must be a live handle and `out` a valid pointer.
enum LogiclmStatus logiclm_program_count_solutions(const struct LogiclmProgram *program,
                                                   size_t max_solutions,
                                                   size_t *out);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not be used again.
void logiclm_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LOGICLM_H */

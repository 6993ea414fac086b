/* C interface of the umt model transformation engine. */

#ifndef UMT_H
#define UMT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every API call. Mirrors the `umt` CLI exit codes.
typedef enum UmtStatus {
  UMT_STATUS_OK = 0,
  UMT_STATUS_PARSE_ERROR = 1,
  UMT_STATUS_INTERFERENCE_REJECTED = 2,
  UMT_STATUS_RUNTIME_ERROR = 3,
  UMT_STATUS_ASSUMPTION_FAILED = 4,
  UMT_STATUS_VERIFICATION_FAILED = 5,
  // Null pointer, invalid UTF-8, or an argument that violates the API.
  UMT_STATUS_INVALID_ARGUMENT = 6,
  // A call that needs state not yet loaded (metamodel, spec, or a run).
  UMT_STATUS_MISSING_STATE = 7,
} UmtStatus;

// Opaque engine session.
typedef struct UmtEngine UmtEngine;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Create a new engine session.
struct UmtEngine *umt_engine_new(void);

// Release an engine session. Passing NULL is a no-op.
//
// # Safety
// `engine` must be a pointer returned by `umt_engine_new` that has not
// been freed already.
void umt_engine_free(struct UmtEngine *engine);

// Parse and add one metamodel (source text). Call once or twice before
// loading a spec; the set is validated when first used.
//
// # Safety
// `engine` must be a live engine pointer; `source` a NUL-terminated string.
enum UmtStatus umt_engine_add_metamodel(struct UmtEngine *engine, const char *source);

// Parse the transformation spec (source text) against the loaded
// metamodels.
//
// # Safety
// `engine` must be a live engine pointer; `source` a NUL-terminated string.
enum UmtStatus umt_engine_set_spec(struct UmtEngine *engine, const char *source);

// Parse the input model (source text). Without this call the input model
// is empty.
//
// # Safety
// `engine` must be a live engine pointer; `source` a NUL-terminated string.
enum UmtStatus umt_engine_set_model(struct UmtEngine *engine, const char *source);

// Set a spec parameter. The value is parsed against the declared type when
// a command runs.
//
// # Safety
// `engine` must be a live engine pointer; `name` and `value` NUL-terminated
// strings.
enum UmtStatus umt_engine_set_param(struct UmtEngine *engine, const char *name, const char *value);

// Check assumptions against the input model. The verdict report is
// available via `umt_engine_report`.
//
// # Safety
// `engine` must be a live engine pointer.
enum UmtStatus umt_engine_check(struct UmtEngine *engine);

// Derive the phase plan. The rendered plan is available via
// `umt_engine_report`.
//
// # Safety
// `engine` must be a live engine pointer.
enum UmtStatus umt_engine_plan(struct UmtEngine *engine);

// Execute the transformation. On success the output model text is
// available via `umt_engine_output`. With `verify`, constraints are
// re-checked afterwards and the verdicts stored as the report.
//
// # Safety
// `engine` must be a live engine pointer.
enum UmtStatus umt_engine_run(struct UmtEngine *engine, bool force, bool verify);

// Declaratively verify an output model (source text) against the loaded
// input model.
//
// # Safety
// `engine` must be a live engine pointer; `output_model` a NUL-terminated
// string.
enum UmtStatus umt_engine_verify(struct UmtEngine *engine, const char *output_model);

// Serialized output model of the last successful run, or NULL.
// Free with `umt_string_free`.
//
// # Safety
// `engine` must be a live engine pointer.
char *umt_engine_output(struct UmtEngine *engine);

// Report of the last check/plan/verify, or NULL. Free with
// `umt_string_free`.
//
// # Safety
// `engine` must be a live engine pointer.
char *umt_engine_report(struct UmtEngine *engine);

// Message of the last failure, or NULL. Free with `umt_string_free`.
//
// # Safety
// `engine` must be a live engine pointer.
char *umt_engine_last_error(struct UmtEngine *engine);

// Release a string returned by this library. Passing NULL is a no-op.
//
// # Safety
// `s` must be a pointer returned by this library that has not been freed.
void umt_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* UMT_H */

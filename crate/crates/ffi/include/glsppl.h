/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#ifndef GLSPPL_H
#define GLSPPL_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Error codes. Zero is success.
typedef enum GlspplError {
  GLSPPL_ERROR_OK = 0,
  GLSPPL_ERROR_NULL_POINTER = 1,
  GLSPPL_ERROR_INVALID_ARGUMENT = 2,
  GLSPPL_ERROR_IO = 3,
  GLSPPL_ERROR_INVALID_INSTANCE = 4,
  // The result carries no schedule (infeasible, timed out or failed).
  GLSPPL_ERROR_NO_SOLUTION = 5,
  GLSPPL_ERROR_PANIC = 6,
} GlspplError;

// Solve outcome of a result handle.
typedef enum GlspplStatus {
  GLSPPL_STATUS_OPTIMAL = 0,
  GLSPPL_STATUS_FEASIBLE = 1,
  GLSPPL_STATUS_INFEASIBLE = 2,
  GLSPPL_STATUS_TIME_LIMIT_NO_INCUMBENT = 3,
  GLSPPL_STATUS_UNBOUNDED = 4,
  GLSPPL_STATUS_NUMERICAL_FAILURE = 5,
} GlspplStatus;

// Opaque instance handle.
typedef struct GlspplInstance GlspplInstance;

// Opaque result handle.
typedef struct GlspplResult GlspplResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failing call on this thread. The pointer stays valid
// until the next failing call on the same thread; never free it.
const char *glsppl_last_error(void);

// Loads an instance file.
//
// # Safety
// `path` must be a nul-terminated string and `out` a valid pointer.
enum GlspplError glsppl_instance_load(const char *path, struct GlspplInstance **out);

// Parses an instance from JSON text.
//
// # Safety
// `json` must be a nul-terminated string and `out` a valid pointer.
enum GlspplError glsppl_instance_from_json(const char *json, struct GlspplInstance **out);

// Draws a group instance; `group` is one of 'A'..'E'.
//
// # Safety
// `out` must be a valid pointer.
enum GlspplError glsppl_instance_generate(char group, uint64_t seed, struct GlspplInstance **out);

// Draws a tiny instance small enough for exhaustive checks.
//
// # Safety
// `out` must be a valid pointer.
enum GlspplError glsppl_instance_generate_micro(uint64_t seed, struct GlspplInstance **out);

// Writes an instance file.
//
// # Safety
// `inst` must come from this library; `path` must be nul-terminated.
enum GlspplError glsppl_instance_save(const struct GlspplInstance *inst, const char *path);

// Number of setup-state triples (binary variables) of the instance.
//
// # Safety
// `inst` must come from this library and `out` be a valid pointer.
enum GlspplError glsppl_instance_triple_count(const struct GlspplInstance *inst, size_t *out);

// Releases an instance. Null is ignored.
//
// # Safety
// `inst` must come from this library and not be used afterwards.
void glsppl_instance_free(struct GlspplInstance *inst);

// Solves the full model with the embedded branch-and-bound engine.
//
// # Safety
// `inst` must come from this library and `out` be a valid pointer.
enum GlspplError glsppl_solve_milp(const struct GlspplInstance *inst,
                                   double time_limit,
                                   double gap,
                                   struct GlspplResult **out);

// Runs relax-and-fix. `strategy` is a token `s1`..`s11`; `tiebreak` is
// `s10`, `s11` or null for the default.
//
// # Safety
// `inst` must come from this library, strings must be nul-terminated and
// `out` a valid pointer.
enum GlspplError glsppl_relax_and_fix(const struct GlspplInstance *inst,
                                      const char *strategy,
                                      const char *tiebreak,
                                      size_t k,
                                      double time_limit,
                                      double gap,
                                      struct GlspplResult **out);

// Solve outcome.
//
// # Safety
// `res` must come from this library and `out` be a valid pointer.
enum GlspplError glsppl_result_status(const struct GlspplResult *res, enum GlspplStatus *out);

// Relax-and-fix stage (1-based) that ended the run early; 0 otherwise.
//
// # Safety
// `res` must come from this library and `out` be a valid pointer.
enum GlspplError glsppl_result_stopped_at_stage(const struct GlspplResult *res, size_t *out);

// Objective of the schedule; `NoSolution` when there is none.
//
// # Safety
// `res` must come from this library and `out` be a valid pointer.
enum GlspplError glsppl_result_objective(const struct GlspplResult *res, double *out);

// Proven lower bound; `NoSolution` when none is known.
//
// # Safety
// `res` must come from this library and `out` be a valid pointer.
enum GlspplError glsppl_result_best_bound(const struct GlspplResult *res, double *out);

// Writes the schedule as a JSON solution file.
//
// # Safety
// `res` must come from this library and `path` be nul-terminated.
enum GlspplError glsppl_result_write_solution(const struct GlspplResult *res, const char *path);

// Relax-and-fix run report as JSON, or null for direct solves. Owned by the
// result; valid until it is freed.
//
// # Safety
// `res` must come from this library or be null.
const char *glsppl_result_report_json(const struct GlspplResult *res);

// Releases a result. Null is ignored.
//
// # Safety
// `res` must come from this library and not be used afterwards.
void glsppl_result_free(struct GlspplResult *res);

// Relative gap of `value` against a positive `reference`, in percent.
//
// # Safety
// `out` must be a valid pointer.
enum GlspplError glsppl_gap_percent(double value, double reference, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GLSPPL_H */

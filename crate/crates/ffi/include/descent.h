#ifndef DESCENT_H
#define DESCENT_H

/* This file is generated by cbindgen from descent-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define DESCENT_STATUS_OK 0

#define DESCENT_STATUS_SOLVER_FAILURE 1

#define DESCENT_STATUS_STRUCTURE_FAIL 2

#define DESCENT_STATUS_BAD_INPUT 64

#define DESCENT_STATUS_PANIC 70

#define DESCENT_METHOD_AUTO 0

#define DESCENT_METHOD_INDIRECT 1

#define DESCENT_METHOD_DIRECT 2

/*
 Opaque scenario handle.
 */
typedef struct DescentScenario DescentScenario;

/*
 Opaque solution handle: a trajectory plus its structure certificate.
 */
typedef struct DescentSolution DescentSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Library version as a static string; do not free.
 */
const char *descent_version(void);

/*
 The last error message on this thread, or null if none. Free with
 [`descent_string_free`].
 */
char *descent_last_error(void);

/*
 Release a string returned by this library.

 # Safety
 `s` must be a pointer previously returned by a `descent_*` function that
 documents this deallocator, and must not have been freed already.
 */
void descent_string_free(char *s);

/*
 Parse a scenario from its JSON document (same schema as the CLI files).
 On success writes a handle to `out` and returns `DESCENT_STATUS_OK`.

 # Safety
 `json` must be a valid NUL-terminated UTF-8 string and `out` a valid
 pointer to a writable pointer slot.
 */
int32_t descent_scenario_parse(const char *json, DescentScenario **out);

/*
 Release a scenario handle.

 # Safety
 `s` must come from [`descent_scenario_parse`] and not be freed twice.
 */
void descent_scenario_free(DescentScenario *s);

/*
 Solve a scenario. `method` is one of the `DESCENT_METHOD_*` codes, or -1
 to use the scenario file's selection. `seed` drives the deterministic
 retry ladder. On success (including a converged solve whose structure
 checks fail) a solution handle is written to `out`; the return code is
 `DESCENT_STATUS_OK` when all checks pass and
 `DESCENT_STATUS_STRUCTURE_FAIL` otherwise.

 # Safety
 `scenario` must be a live handle from [`descent_scenario_parse`]; `out`
 must be a valid pointer to a writable pointer slot.
 */
int32_t descent_solve(const DescentScenario *scenario,
                      int32_t method,
                      uint64_t seed,
                      DescentSolution **out);

/*
 Release a solution handle.

 # Safety
 `s` must come from [`descent_solve`] and not be freed twice.
 */
void descent_solution_free(DescentSolution *s);

/*
 Objective value of the solution (NaN for a null handle).

 # Safety
 `s` must be a live solution handle or null.
 */
double descent_solution_cost(const DescentSolution *s);

/*
 Final time of the solution, s (NaN for a null handle).

 # Safety
 `s` must be a live solution handle or null.
 */
double descent_solution_final_time(const DescentSolution *s);

/*
 1 when every structure check passed, 0 otherwise (or for null handles).

 # Safety
 `s` must be a live solution handle or null.
 */
int32_t descent_solution_overall_pass(const DescentSolution *s);

/*
 The trajectory in the documented CSV layout. Free with
 [`descent_string_free`]; null on a null handle.

 # Safety
 `s` must be a live solution handle or null.
 */
char *descent_solution_trajectory_csv(const DescentSolution *s);

/*
 The structure certificate as a JSON document. Free with
 [`descent_string_free`]; null on a null handle or serialization failure.

 # Safety
 `s` must be a live solution handle or null.
 */
char *descent_solution_report_json(const DescentSolution *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DESCENT_H */

#ifndef ROBUSTCOUNTER_H
#define ROBUSTCOUNTER_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RcErrorCode {
  RC_ERROR_CODE_OK = 0,
  RC_ERROR_CODE_NULL_POINTER = 1,
  RC_ERROR_CODE_INVALID_UTF8 = 2,
  RC_ERROR_CODE_INVALID_ARGUMENT = 3,
  RC_ERROR_CODE_PARSE = 4,
  RC_ERROR_CODE_MODEL = 5,
  RC_ERROR_CODE_UNSUPPORTED = 6,
  RC_ERROR_CODE_IO = 7,
  RC_ERROR_CODE_PANIC = 8,
} RcErrorCode;

typedef enum RcVarKind {
  RC_VAR_KIND_CONTINUOUS = 0,
  RC_VAR_KIND_BINARY = 1,
  RC_VAR_KIND_INTEGER = 2,
} RcVarKind;

typedef enum RcSense {
  RC_SENSE_LE = 0,
  RC_SENSE_GE = 1,
  RC_SENSE_EQ = 2,
} RcSense;

typedef enum RcStatus {
  RC_STATUS_OPTIMAL = 0,
  RC_STATUS_INFEASIBLE = 1,
  RC_STATUS_UNBOUNDED = 2,
  RC_STATUS_LIMIT_REACHED = 3,
} RcStatus;

typedef enum RcMode {
  RC_MODE_IRC = 0,
  RC_MODE_RC = 1,
} RcMode;

/*
 Opaque model handle.
 */
typedef struct RcModel RcModel;

/*
 Opaque solution handle.
 */
typedef struct RcSolution RcSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread, or NULL. The pointer
 stays valid until the next failing call on the same thread.
 */
const char *rc_last_error_message(void);

/*
 # Safety
 `s` must be NULL or a string returned by this library, not yet freed.
 */
void rc_string_free(char *s);

/*
 Empty maximization model. Never NULL.
 */
struct RcModel *rc_model_new(void);

/*
 # Safety
 `model` must be NULL or a handle from this library, not yet freed.
 */
void rc_model_free(struct RcModel *model);

/*
 # Safety
 `text` must be a NUL-terminated string; `out` a writable pointer.
 */
enum RcErrorCode rc_model_from_text(const char *src, struct RcModel **out);

/*
 # Safety
 `model` must be a live handle; `out` a writable pointer.
 */
enum RcErrorCode rc_model_to_text(const struct RcModel *model, char **out);

/*
 # Safety
 `model` must be NULL or a live handle.
 */
uintptr_t rc_model_num_variables(const struct RcModel *model);

/*
 # Safety
 `model` must be NULL or a live handle.
 */
uintptr_t rc_model_num_constraints(const struct RcModel *model);

/*
 Appends a variable and writes its index to `out_index` (may be NULL).

 # Safety
 `model` must be a live handle and `name` a NUL-terminated string.
 */
enum RcErrorCode rc_model_add_variable(struct RcModel *model,
                                       const char *name,
                                       enum RcVarKind kind,
                                       double lower,
                                       double upper,
                                       uintptr_t *out_index);

/*
 Adds `Σ coeffs[k]·x[indices[k]] sense rhs`.

 # Safety
 `indices` and `coeffs` must each point to `len` readable elements.
 */
enum RcErrorCode rc_model_add_constraint(struct RcModel *model,
                                         const char *label,
                                         uintptr_t len,
                                         const uintptr_t *indices,
                                         const double *coeffs,
                                         enum RcSense sense,
                                         double rhs);

/*
 # Safety
 `indices` and `coeffs` must each point to `len` readable elements.
 */
enum RcErrorCode rc_model_set_objective(struct RcModel *model,
                                        bool maximize,
                                        uintptr_t len,
                                        const uintptr_t *indices,
                                        const double *coeffs);

/*
 Solves with default options. Limits and infeasibility are reported
 through the solution status, not the return code.

 # Safety
 `model` must be a live handle; `out` a writable pointer.
 */
enum RcErrorCode rc_solve(const struct RcModel *model, struct RcSolution **out);

/*
 # Safety
 `solution` must be NULL or a handle from this library, not yet freed.
 */
void rc_solution_free(struct RcSolution *solution);

/*
 Status of a solution; `LimitReached` for a NULL handle.

 # Safety
 `solution` must be NULL or a live handle.
 */
enum RcStatus rc_solution_status(const struct RcSolution *solution);

/*
 Objective value, NaN when no point is known.

 # Safety
 `solution` must be NULL or a live handle.
 */
double rc_solution_objective(const struct RcSolution *solution);

/*
 Number of values held (0 when no point is known).

 # Safety
 `solution` must be NULL or a live handle.
 */
uintptr_t rc_solution_num_values(const struct RcSolution *solution);

/*
 Copies `min(len, num_values)` values into `out`.

 # Safety
 `out` must point to `len` writable doubles.
 */
enum RcErrorCode rc_solution_values(const struct RcSolution *solution, double *out, uintptr_t len);

/*
 # Safety
 `solution` must be a live handle; `out` a writable pointer.
 */
enum RcErrorCode rc_solution_value(const struct RcSolution *solution, uintptr_t index, double *out);

/*
 `sqrt(-2 ln kappa)`.

 # Safety
 `out` must be a writable pointer.
 */
enum RcErrorCode rc_omega_from_kappa(double kappa, double *out);

/*
 Upper `kappa` quantile of the standard normal.

 # Safety
 `out` must be a writable pointer.
 */
enum RcErrorCode rc_normal_lambda(double kappa, double *out);

/*
 Deviation above the mean with tail probability at most `kappa`.

 # Safety
 `out` must be a writable pointer.
 */
enum RcErrorCode rc_poisson_deviation(double mean, double kappa, double *out);

/*
 Builds the robust counterpart of `model` for the annotation text.

 # Safety
 `model` must be a live handle, `annotations` NUL-terminated, `out` writable.
 */
enum RcErrorCode rc_robustify(const struct RcModel *model,
                              const char *annotations,
                              enum RcMode mode,
                              double epsilon,
                              double delta,
                              double kappa,
                              struct RcModel **out);

/*
 Index of the variable called `name`, or `usize::MAX`.

 # Safety
 `name` must be NUL-terminated.
 */
uintptr_t rc_model_find_variable(const struct RcModel *model, const char *name);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ROBUSTCOUNTER_H */

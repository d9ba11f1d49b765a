#ifndef GNFLOW_H
#define GNFLOW_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

// Result codes shared by every entry point.
typedef enum GnflowStatus {
  GNFLOW_STATUS_OK = 0,
  GNFLOW_STATUS_NULL_POINTER = 1,
  GNFLOW_STATUS_INVALID_ARGUMENT = 2,
  GNFLOW_STATUS_INVALID_GRID = 3,
  GNFLOW_STATUS_INVALID_FIELD = 4,
  GNFLOW_STATUS_ILL_POSED = 5,
  GNFLOW_STATUS_SOLVER_FAILURE = 6,
  GNFLOW_STATUS_MONOTONICITY_LOSS = 7,
  GNFLOW_STATUS_STEP_REJECTED = 8,
  GNFLOW_STATUS_BUFFER_TOO_SMALL = 9,
  GNFLOW_STATUS_PANIC = 10,
} GnflowStatus;

// Opaque solver handle: the Lagrangian state `(ψ, v)`, the initial height
// and the current time.
typedef struct GnflowSolver GnflowSolver;

// Conserved quantities and norms of the reconstructed Eulerian fields.
typedef struct GnflowDiagnostics {
  double t;
  double mass;
  double momentum;
  double energy;
  double min_phix;
  double sobolev_h;
  double sobolev_u;
} GnflowDiagnostics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *gnflow_version(void);

// Copies the calling thread's last error message into `buf` (NUL-terminated,
// truncated to `len - 1` bytes) and returns the full message length in bytes,
// excluding the terminator. Pass `buf = NULL` to query the length.
//
// # Safety
// `buf` must be null or point to at least `len` writable bytes.
size_t gnflow_last_error_message(char *buf, size_t len);

// Solves `3h u - ∂x(h³ u_x) = f` on the periodic grid of `n` points over `[0, length)`.
//
// # Safety
// `h` and `f` must point to `n` readable doubles, `u_out` to `n` writable doubles.
enum GnflowStatus gnflow_solve_ah(double length,
                                  size_t n,
                                  const double *h,
                                  const double *f,
                                  double *u_out);

// Evaluates the Lagrangian acceleration `F(φ, v, h₀)` for `φ = id + ψ`.
//
// # Safety
// `h0`, `psi`, `v` must point to `n` readable doubles, `f_out` to `n` writable doubles.
enum GnflowStatus gnflow_evaluate_f(double length,
                                    size_t n,
                                    const double *h0,
                                    const double *psi,
                                    const double *v,
                                    double *f_out);

// Samples the exact solitary wave of amplitude `a` centred at `length/2` at time `t`.
//
// # Safety
// `h_out` and `u_out` must point to `n` writable doubles.
enum GnflowStatus gnflow_solitary_wave(double length,
                                       size_t n,
                                       double a,
                                       double t,
                                       double *h_out,
                                       double *u_out);

// Creates a solver at `t = 0` with `φ = id` and `φ_t = u0`.
//
// # Safety
// `h0` and `u0` must point to `n` readable doubles; `out` must be a valid
// pointer to a handle slot. On failure `*out` is set to NULL.
enum GnflowStatus gnflow_solver_new(double length,
                                    size_t n,
                                    const double *h0,
                                    const double *u0,
                                    struct GnflowSolver **out);

// Releases a handle; NULL is ignored.
//
// # Safety
// `solver` must be null or a handle from [`gnflow_solver_new`] not yet freed.
void gnflow_solver_free(struct GnflowSolver *solver);

// Advances by `steps` RK4 steps of size `dt`. On error the handle keeps the
// last accepted state and time.
//
// # Safety
// `solver` must be a live handle.
enum GnflowStatus gnflow_solver_step(struct GnflowSolver *solver, double dt, size_t steps);

// Current time.
//
// # Safety
// `solver` must be a live handle and `t_out` writable.
enum GnflowStatus gnflow_solver_time(const struct GnflowSolver *solver, double *t_out);

// Copies the Lagrangian state `ψ = φ - id` and `v = φ_t` on the label grid.
//
// # Safety
// `solver` must be a live handle; `psi_out` and `v_out` must hold `n` doubles.
enum GnflowStatus gnflow_solver_state(const struct GnflowSolver *solver,
                                      size_t n,
                                      double *psi_out,
                                      double *v_out);

// Reconstructs the Eulerian `h` and `u` on the grid nodes.
//
// # Safety
// `solver` must be a live handle; `h_out` and `u_out` must hold `n` doubles.
enum GnflowStatus gnflow_solver_reconstruct(const struct GnflowSolver *solver,
                                            size_t n,
                                            double *h_out,
                                            double *u_out);

// Diagnostics of the current state with Sobolev order `sigma`.
//
// # Safety
// `solver` must be a live handle and `out` writable.
enum GnflowStatus gnflow_solver_diagnostics(const struct GnflowSolver *solver,
                                            double sigma,
                                            struct GnflowDiagnostics *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GNFLOW_H */

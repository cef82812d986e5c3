/* C interface for the attsim rigid-body attitude simulator. */

#ifndef ATTSIM_H
#define ATTSIM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status code returned by every fallible function.
enum AttsimStatus
#if defined(__cplusplus) || __STDC_VERSION__ >= 202311L
  : int32_t
#endif // defined(__cplusplus) || __STDC_VERSION__ >= 202311L
 {
  ATTSIM_STATUS_OK = 0,
  // A required pointer argument was null.
  ATTSIM_STATUS_NULL_ARGUMENT = -1,
  // An argument failed validation (step size, options, array sizes...).
  ATTSIM_STATUS_INVALID_ARGUMENT = -2,
  // The inertia tensor was rejected.
  ATTSIM_STATUS_INVALID_INERTIA = -3,
  // The supplied orientation is not a rotation matrix.
  ATTSIM_STATUS_INVALID_ROTATION = -4,
  // Newton iteration did not converge.
  ATTSIM_STATUS_NON_CONVERGENCE = -5,
  // The Newton system was numerically singular.
  ATTSIM_STATUS_SINGULAR_JACOBIAN = -6,
  // The implementation panicked; state may be inconsistent.
  ATTSIM_STATUS_PANIC = -7,
};
#ifndef __cplusplus
#if __STDC_VERSION__ >= 202311L
typedef enum AttsimStatus AttsimStatus;
#else
typedef int32_t AttsimStatus;
#endif // __STDC_VERSION__ >= 202311L
#endif // __cplusplus

// A validated rigid body (inertia tensor pair). Opaque.
typedef struct AttsimBody AttsimBody;

// A propagated trajectory. Opaque; query with `attsim_trajectory_*`.
typedef struct AttsimTrajectory AttsimTrajectory;

// Newton solver options. Obtain defaults from
// [`attsim_solver_options_default`]; a null options pointer means
// defaults everywhere one is accepted.
typedef struct AttsimSolverOptions {
  // Step scale in (0, 1].
  double alpha;
  // Absolute tolerance on the residual 2-norm.
  double tol;
  uint32_t max_iters;
  // Nonzero: seed Newton with the momentum-based guess; zero: start at
  // the origin.
  int32_t use_momentum_guess;
} AttsimSolverOptions;

// Result of one implicit solve.
typedef struct AttsimSolveResult {
  // Lie-algebra coordinates of the incremental rotation.
  double w[3];
  // The incremental rotation, row-major.
  double f[9];
  uint32_t iterations;
  double residual_norm;
} AttsimSolveResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failure on this thread. Empty until a call
// fails; the pointer stays valid until the next failing call on the same
// thread.
const char *attsim_last_error_message(void);

// Default solver options (momentum guess, alpha 1, tol 1e-12, 50
// iterations).
AttsimStatus attsim_solver_options_default(struct AttsimSolverOptions *out);

// Creates a body from a full symmetric inertia tensor (row-major
// `double[9]`, kg m^2). The tensor must be symmetric, positive definite,
// and satisfy the eigenvalue triangle inequality.
AttsimStatus attsim_body_new(const double *j, struct AttsimBody **out);

// Creates a body from three principal moments.
AttsimStatus attsim_body_new_principal(double a, double b, double c, struct AttsimBody **out);

// Frees a body handle. Null is ignored.
void attsim_body_free(struct AttsimBody *body);

// Solves the implicit step equation `hat(h*pi) = F*Jd - Jd*F^T` for the
// incremental rotation.
AttsimStatus attsim_solve(const struct AttsimBody *body,
                          double h,
                          const double *pi,
                          const struct AttsimSolverOptions *opts,
                          struct AttsimSolveResult *out);

// Advances one integrator step in place. `r` (row-major `double[9]`) and
// `pi` (`double[3]`) are read and overwritten; `u` is the body-frame
// torque (null for none). `stats` optionally receives the solver
// statistics of the step.
AttsimStatus attsim_step(const struct AttsimBody *body,
                         double h,
                         const double *u,
                         double *r,
                         double *pi,
                         const struct AttsimSolverOptions *opts,
                         struct AttsimSolveResult *stats);

// Propagates `n_steps` steps under a constant body-frame torque (null for
// free motion) and returns a trajectory handle holding all `n_steps + 1`
// states.
AttsimStatus attsim_propagate(const struct AttsimBody *body,
                              const double *r0,
                              const double *pi0,
                              double h,
                              uint64_t n_steps,
                              const double *u,
                              const struct AttsimSolverOptions *opts,
                              struct AttsimTrajectory **out);

// Number of stored samples (`n_steps + 1` for a full propagation). Zero
// for a null handle.
size_t attsim_trajectory_len(const struct AttsimTrajectory *trajectory);

// Copies sample `index` into `t` (nullable), `r` (nullable, row-major
// `double[9]`), and `pi` (nullable, `double[3]`).
AttsimStatus attsim_trajectory_sample(const struct AttsimTrajectory *trajectory,
                                      size_t index,
                                      double *t,
                                      double *r,
                                      double *pi);

// Frees a trajectory handle. Null is ignored.
void attsim_trajectory_free(struct AttsimTrajectory *trajectory);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ATTSIM_H */

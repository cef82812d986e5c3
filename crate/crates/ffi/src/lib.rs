//! C ABI for the attitude simulator.
//!
//! Design:
//!
//! - **Opaque handles**: callers hold `AttsimBody*` / `AttsimTrajectory*`
//!   pointers and free them with the matching `*_free` functions.
//! - **Status codes**: every fallible function returns [`AttsimStatus`];
//!   `ATTSIM_STATUS_OK` is zero, errors are negative.
//! - **Out-parameters**: results are written through caller-provided
//!   pointers; matrices are row-major `double[9]`, vectors `double[3]`.
//! - **Thread-local error text**: after a failure,
//!   [`attsim_last_error_message`] returns a description valid on the
//!   calling thread until its next failing call.
//! - **No unwinding across the boundary**: panics are caught and reported
//!   as `ATTSIM_STATUS_PANIC`.
//!
//! The generated header lands in `include/attsim.h`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use nalgebra::{Matrix3, Vector3};

use attsim::integrator::{propagate, step, IntegratorError, TorqueSchedule};
use attsim::rigid_body::{AttitudeState, InertiaPair};
use attsim::so3::RotationMatrix;
use attsim::solver::{newton_solve, InitialGuess, SolverError, SolverOptions};

/// Status code returned by every fallible function.
#[repr(i32)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttsimStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = -1,
    /// An argument failed validation (step size, options, array sizes...).
    InvalidArgument = -2,
    /// The inertia tensor was rejected.
    InvalidInertia = -3,
    /// The supplied orientation is not a rotation matrix.
    InvalidRotation = -4,
    /// Newton iteration did not converge.
    NonConvergence = -5,
    /// The Newton system was numerically singular.
    SingularJacobian = -6,
    /// The implementation panicked; state may be inconsistent.
    Panic = -7,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let text = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = text);
}

fn fail(status: AttsimStatus, message: &str) -> AttsimStatus {
    set_error(message);
    status
}

fn solver_failure(err: &SolverError) -> AttsimStatus {
    let status = match err {
        SolverError::NonConvergence { .. } => AttsimStatus::NonConvergence,
        SolverError::SingularJacobian { .. } => AttsimStatus::SingularJacobian,
        _ => AttsimStatus::InvalidArgument,
    };
    fail(status, &err.to_string())
}

/// Message for the most recent failure on this thread. Empty until a call
/// fails; the pointer stays valid until the next failing call on the same
/// thread.
#[no_mangle]
pub extern "C" fn attsim_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// A validated rigid body (inertia tensor pair). Opaque.
pub struct AttsimBody {
    inertia: InertiaPair,
}

/// A propagated trajectory. Opaque; query with `attsim_trajectory_*`.
pub struct AttsimTrajectory {
    samples: Vec<(f64, Matrix3<f64>, Vector3<f64>)>,
}

/// Newton solver options. Obtain defaults from
/// [`attsim_solver_options_default`]; a null options pointer means
/// defaults everywhere one is accepted.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct AttsimSolverOptions {
    /// Step scale in (0, 1].
    pub alpha: f64,
    /// Absolute tolerance on the residual 2-norm.
    pub tol: f64,
    pub max_iters: u32,
    /// Nonzero: seed Newton with the momentum-based guess; zero: start at
    /// the origin.
    pub use_momentum_guess: i32,
}

/// Result of one implicit solve.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct AttsimSolveResult {
    /// Lie-algebra coordinates of the incremental rotation.
    pub w: [f64; 3],
    /// The incremental rotation, row-major.
    pub f: [f64; 9],
    pub iterations: u32,
    pub residual_norm: f64,
}

fn options_from_c(opts: *const AttsimSolverOptions) -> SolverOptions {
    if opts.is_null() {
        return SolverOptions::default();
    }
    let c = unsafe { *opts };
    SolverOptions {
        alpha: c.alpha,
        tol: c.tol,
        max_iters: c.max_iters,
        w0_strategy: if c.use_momentum_guess != 0 {
            InitialGuess::MomentumGuess
        } else {
            InitialGuess::Zero
        },
    }
}

unsafe fn read_vec3(p: *const f64) -> Vector3<f64> {
    Vector3::new(*p, *p.add(1), *p.add(2))
}

unsafe fn read_mat3(p: *const f64) -> Matrix3<f64> {
    Matrix3::from_row_slice(std::slice::from_raw_parts(p, 9))
}

unsafe fn write_vec3(p: *mut f64, v: Vector3<f64>) {
    *p = v.x;
    *p.add(1) = v.y;
    *p.add(2) = v.z;
}

unsafe fn write_mat3(p: *mut f64, m: &Matrix3<f64>) {
    for row in 0..3 {
        for col in 0..3 {
            *p.add(row * 3 + col) = m[(row, col)];
        }
    }
}

fn mat3_rows(m: &Matrix3<f64>) -> [f64; 9] {
    [
        m[(0, 0)],
        m[(0, 1)],
        m[(0, 2)],
        m[(1, 0)],
        m[(1, 1)],
        m[(1, 2)],
        m[(2, 0)],
        m[(2, 1)],
        m[(2, 2)],
    ]
}

fn guarded(body: impl FnOnce() -> AttsimStatus) -> AttsimStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => fail(AttsimStatus::Panic, "internal panic"),
    }
}

/// Default solver options (momentum guess, alpha 1, tol 1e-12, 50
/// iterations).
#[no_mangle]
pub extern "C" fn attsim_solver_options_default(out: *mut AttsimSolverOptions) -> AttsimStatus {
    if out.is_null() {
        return fail(AttsimStatus::NullArgument, "out is null");
    }
    let d = SolverOptions::default();
    unsafe {
        *out = AttsimSolverOptions {
            alpha: d.alpha,
            tol: d.tol,
            max_iters: d.max_iters,
            use_momentum_guess: 1,
        };
    }
    AttsimStatus::Ok
}

/// Creates a body from a full symmetric inertia tensor (row-major
/// `double[9]`, kg m^2). The tensor must be symmetric, positive definite,
/// and satisfy the eigenvalue triangle inequality.
#[no_mangle]
pub unsafe extern "C" fn attsim_body_new(j: *const f64, out: *mut *mut AttsimBody) -> AttsimStatus {
    guarded(|| {
        if j.is_null() || out.is_null() {
            return fail(AttsimStatus::NullArgument, "j or out is null");
        }
        match InertiaPair::from_inertia(&read_mat3(j)) {
            Ok(inertia) => {
                *out = Box::into_raw(Box::new(AttsimBody { inertia }));
                AttsimStatus::Ok
            }
            Err(e) => fail(AttsimStatus::InvalidInertia, &e.to_string()),
        }
    })
}

/// Creates a body from three principal moments.
#[no_mangle]
pub unsafe extern "C" fn attsim_body_new_principal(
    a: f64,
    b: f64,
    c: f64,
    out: *mut *mut AttsimBody,
) -> AttsimStatus {
    guarded(|| {
        if out.is_null() {
            return fail(AttsimStatus::NullArgument, "out is null");
        }
        match InertiaPair::from_principal_moments(a, b, c) {
            Ok(inertia) => {
                *out = Box::into_raw(Box::new(AttsimBody { inertia }));
                AttsimStatus::Ok
            }
            Err(e) => fail(AttsimStatus::InvalidInertia, &e.to_string()),
        }
    })
}

/// Frees a body handle. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn attsim_body_free(body: *mut AttsimBody) {
    if !body.is_null() {
        drop(Box::from_raw(body));
    }
}

/// Solves the implicit step equation `hat(h*pi) = F*Jd - Jd*F^T` for the
/// incremental rotation.
#[no_mangle]
pub unsafe extern "C" fn attsim_solve(
    body: *const AttsimBody,
    h: f64,
    pi: *const f64,
    opts: *const AttsimSolverOptions,
    out: *mut AttsimSolveResult,
) -> AttsimStatus {
    guarded(|| {
        if body.is_null() || pi.is_null() || out.is_null() {
            return fail(AttsimStatus::NullArgument, "body, pi, or out is null");
        }
        let body = &*body;
        match newton_solve(body.inertia.jd(), h, read_vec3(pi), &options_from_c(opts)) {
            Ok(result) => {
                *out = AttsimSolveResult {
                    w: [result.w.x, result.w.y, result.w.z],
                    f: mat3_rows(result.rotation.matrix()),
                    iterations: result.iterations,
                    residual_norm: result.residual_norm,
                };
                AttsimStatus::Ok
            }
            Err(e) => solver_failure(&e),
        }
    })
}

/// Advances one integrator step in place. `r` (row-major `double[9]`) and
/// `pi` (`double[3]`) are read and overwritten; `u` is the body-frame
/// torque (null for none). `stats` optionally receives the solver
/// statistics of the step.
#[no_mangle]
pub unsafe extern "C" fn attsim_step(
    body: *const AttsimBody,
    h: f64,
    u: *const f64,
    r: *mut f64,
    pi: *mut f64,
    opts: *const AttsimSolverOptions,
    stats: *mut AttsimSolveResult,
) -> AttsimStatus {
    guarded(|| {
        if body.is_null() || r.is_null() || pi.is_null() {
            return fail(AttsimStatus::NullArgument, "body, r, or pi is null");
        }
        let body = &*body;
        let torque = if u.is_null() {
            Vector3::zeros()
        } else {
            read_vec3(u)
        };
        let rotation = match RotationMatrix::from_matrix(&read_mat3(r), 1e-6) {
            Ok(rotation) => rotation,
            Err(e) => return fail(AttsimStatus::InvalidRotation, &e.to_string()),
        };
        let state = AttitudeState {
            r: rotation,
            pi: read_vec3(pi),
            t: 0.0,
        };
        match step(&state, torque, h, &body.inertia, &options_from_c(opts)) {
            Ok(record) => {
                write_mat3(r, record.state.r.matrix());
                write_vec3(pi, record.state.pi);
                if !stats.is_null() {
                    *stats = AttsimSolveResult {
                        w: [0.0; 3],
                        f: mat3_rows(record.increment.matrix()),
                        iterations: record.newton_iterations,
                        residual_norm: record.newton_residual,
                    };
                }
                AttsimStatus::Ok
            }
            Err(e) => solver_failure(&e),
        }
    })
}

/// Propagates `n_steps` steps under a constant body-frame torque (null for
/// free motion) and returns a trajectory handle holding all `n_steps + 1`
/// states.
#[no_mangle]
pub unsafe extern "C" fn attsim_propagate(
    body: *const AttsimBody,
    r0: *const f64,
    pi0: *const f64,
    h: f64,
    n_steps: u64,
    u: *const f64,
    opts: *const AttsimSolverOptions,
    out: *mut *mut AttsimTrajectory,
) -> AttsimStatus {
    guarded(|| {
        if body.is_null() || r0.is_null() || pi0.is_null() || out.is_null() {
            return fail(AttsimStatus::NullArgument, "required pointer is null");
        }
        let body = &*body;
        let rotation = match RotationMatrix::from_matrix(&read_mat3(r0), 1e-6) {
            Ok(rotation) => rotation,
            Err(e) => return fail(AttsimStatus::InvalidRotation, &e.to_string()),
        };
        let schedule = if u.is_null() {
            TorqueSchedule::Zero
        } else {
            TorqueSchedule::Constant(read_vec3(u))
        };
        let initial = AttitudeState {
            r: rotation,
            pi: read_vec3(pi0),
            t: 0.0,
        };
        match propagate(
            &initial,
            &schedule,
            h,
            n_steps,
            &body.inertia,
            &options_from_c(opts),
        ) {
            Ok(trajectory) => {
                let samples = trajectory
                    .records
                    .iter()
                    .map(|rec| (rec.state.t, *rec.state.r.matrix(), rec.state.pi))
                    .collect();
                *out = Box::into_raw(Box::new(AttsimTrajectory { samples }));
                AttsimStatus::Ok
            }
            Err(IntegratorError::StepFailed { source, step }) => {
                let status = solver_failure(&source);
                set_error(&format!("step {step}: {source}"));
                status
            }
            Err(e) => fail(AttsimStatus::InvalidArgument, &e.to_string()),
        }
    })
}

/// Number of stored samples (`n_steps + 1` for a full propagation). Zero
/// for a null handle.
#[no_mangle]
pub unsafe extern "C" fn attsim_trajectory_len(trajectory: *const AttsimTrajectory) -> usize {
    if trajectory.is_null() {
        return 0;
    }
    (*trajectory).samples.len()
}

/// Copies sample `index` into `t` (nullable), `r` (nullable, row-major
/// `double[9]`), and `pi` (nullable, `double[3]`).
#[no_mangle]
pub unsafe extern "C" fn attsim_trajectory_sample(
    trajectory: *const AttsimTrajectory,
    index: usize,
    t: *mut f64,
    r: *mut f64,
    pi: *mut f64,
) -> AttsimStatus {
    guarded(|| {
        if trajectory.is_null() {
            return fail(AttsimStatus::NullArgument, "trajectory is null");
        }
        let trajectory = &*trajectory;
        let Some((time, rot, mom)) = trajectory.samples.get(index) else {
            return fail(
                AttsimStatus::InvalidArgument,
                &format!(
                    "index {index} out of range ({} samples)",
                    trajectory.samples.len()
                ),
            );
        };
        if !t.is_null() {
            *t = *time;
        }
        if !r.is_null() {
            write_mat3(r, rot);
        }
        if !pi.is_null() {
            write_vec3(pi, *mom);
        }
        AttsimStatus::Ok
    })
}

/// Frees a trajectory handle. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn attsim_trajectory_free(trajectory: *mut AttsimTrajectory) {
    if !trajectory.is_null() {
        drop(Box::from_raw(trajectory));
    }
}

//! Structure-blind reference integrator.
//!
//! Classical fourth-order Runge-Kutta applied to the continuous rigid-body
//! equations
//!
//! ```text
//! dR/dt  = R * hat(Omega)
//! dPi/dt = Pi x Omega + u,        Omega = J^{-1} Pi
//! ```
//!
//! with the orientation treated as nine unconstrained reals and, by
//! default, no reprojection onto SO(3). The point of this integrator is to
//! make structure loss visible in side-by-side comparisons; an optional
//! per-step polar reprojection is available as a second comparison series.

use nalgebra::{Matrix3, Vector3};

use crate::integrator::{IntegratorError, TorqueSchedule};
use crate::so3::{hat, polar_project};

/// Time derivative of `(R, Pi)` under the continuous dynamics.
pub fn continuous_rhs(
    r: &Matrix3<f64>,
    pi: Vector3<f64>,
    u: Vector3<f64>,
    j: &Matrix3<f64>,
) -> (Matrix3<f64>, Vector3<f64>) {
    let omega = j
        .lu()
        .solve(&pi)
        .expect("inertia tensor must be invertible");
    (r * hat(omega).matrix(), pi.cross(&omega) + u)
}

/// One classical Runge-Kutta step with the torque held constant across the
/// step. `R` is advanced as a raw matrix; nothing pulls it back to SO(3).
pub fn rk4_step(
    r: &Matrix3<f64>,
    pi: Vector3<f64>,
    u: Vector3<f64>,
    h: f64,
    j: &Matrix3<f64>,
) -> (Matrix3<f64>, Vector3<f64>) {
    debug_assert!(h > 0.0);
    let (k1r, k1p) = continuous_rhs(r, pi, u, j);
    let (k2r, k2p) = continuous_rhs(&(r + 0.5 * h * k1r), pi + 0.5 * h * k1p, u, j);
    let (k3r, k3p) = continuous_rhs(&(r + 0.5 * h * k2r), pi + 0.5 * h * k2p, u, j);
    let (k4r, k4p) = continuous_rhs(&(r + h * k3r), pi + h * k3p, u, j);
    (
        r + (h / 6.0) * (k1r + 2.0 * k2r + 2.0 * k3r + k4r),
        pi + (h / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p),
    )
}

/// Orientation/momentum sample from the reference integrator. Unlike the
/// variational records, `r` is a raw matrix that may have drifted off the
/// group.
#[derive(Debug, Clone, Copy)]
pub struct RawState {
    pub r: Matrix3<f64>,
    pub pi: Vector3<f64>,
    pub t: f64,
}

/// Propagates the reference integrator, returning all `n_steps + 1` states.
/// With `project` set, each step is followed by a polar reprojection onto
/// SO(3).
pub fn rk4_propagate(
    r0: &Matrix3<f64>,
    pi0: Vector3<f64>,
    schedule: &TorqueSchedule,
    h: f64,
    n_steps: u64,
    j: &Matrix3<f64>,
    project: bool,
) -> Result<Vec<RawState>, IntegratorError> {
    if !(h > 0.0) {
        return Err(IntegratorError::NonPositiveStep { h });
    }
    if n_steps == 0 {
        return Err(IntegratorError::EmptyHorizon);
    }
    schedule.validate(0.0, n_steps as f64 * h)?;

    let mut states = Vec::with_capacity(n_steps as usize + 1);
    states.push(RawState {
        r: *r0,
        pi: pi0,
        t: 0.0,
    });
    let mut r = *r0;
    let mut pi = pi0;
    for k in 0..n_steps {
        let u = schedule.sample(k as f64 * h);
        let (rn, pin) = rk4_step(&r, pi, u, h, j);
        r = if project { polar_project(&rn) } else { rn };
        pi = pin;
        states.push(RawState {
            r,
            pi,
            t: (k + 1) as f64 * h,
        });
    }
    Ok(states)
}

//! Structure-preserving simulation of rigid-body attitude dynamics on
//! SO(3).
//!
//! The orientation is propagated by a discrete-mechanics integrator whose
//! update stays on the rotation group by construction: each step solves an
//! implicit equation for the incremental rotation `F_k` on the Lie algebra
//! (Newton-Raphson, [`solver`]), then advances
//!
//! ```text
//! R_{k+1}  = R_k * F_k
//! Pi_{k+1} = F_k^T * Pi_k + h * u_k
//! ```
//!
//! No re-orthonormalization is ever applied. Under zero torque the update
//! conserves the body momentum norm and the spatial angular momentum
//! exactly, and in practice the kinetic energy as well; a deliberately
//! structure-blind RK4 baseline ([`baseline`]) makes the contrast
//! measurable through the [`diagnostics`] series.
//!
//! Modules:
//!
//! * [`so3`] - hat/vee maps, exponential map, rotation validation
//! * [`rigid_body`] - inertia tensors, kinetic energy, momentum maps
//! * [`solver`] - Newton-Raphson for the implicit step equation
//! * [`integrator`] - the discrete-mechanics stepper and trajectories
//! * [`baseline`] - unconstrained RK4 reference integrator
//! * [`diagnostics`] - conservation series and drift summaries
//! * [`config`] / [`run`] - JSON configuration and the batch CLI entry
//!   points

pub mod baseline;
pub mod config;
pub mod diagnostics;
pub mod integrator;
pub mod rigid_body;
pub mod run;
pub mod so3;
pub mod solver;

pub use rigid_body::{AttitudeState, InertiaPair};
pub use so3::{exp_so3, hat, vee, RotationMatrix, SkewMat3};
pub use solver::{newton_solve, SolveResult, SolverOptions};

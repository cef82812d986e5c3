//! Discrete-mechanics attitude propagation.
//!
//! One step of the integrator advances `(R_k, Pi_k)` by
//!
//! ```text
//! hat(h * Pi_k) = F_k * Jd - Jd * F_k^T      (implicit solve for F_k)
//! R_{k+1}  = R_k * F_k
//! Pi_{k+1} = F_k^T * Pi_k + h * u_k
//! ```
//!
//! where `u_k` is the applied moment, interpreted in the body frame and
//! sampled with zero-order hold at the left endpoint of the step. The
//! orientation is never re-orthonormalized: `F_k` is a rotation by
//! construction, so the update stays on the group to roundoff, and whatever
//! drift accumulates is measured by the diagnostics rather than masked.
//!
//! For torque-free motion the update conserves `|Pi|` and the spatial
//! momentum `R_k * Pi_k` exactly (orthogonality of `F_k`), which is the
//! point of the construction.

use nalgebra::Vector3;
use thiserror::Error;

use crate::rigid_body::{AttitudeState, InertiaPair};
use crate::so3::RotationMatrix;
use crate::solver::{newton_solve, SolverError, SolverOptions};

#[derive(Debug, Error)]
pub enum IntegratorError {
    #[error("step size must be positive, got {h}")]
    NonPositiveStep { h: f64 },
    #[error("step count must be at least 1")]
    EmptyHorizon,
    #[error("decimation factor must be at least 1")]
    ZeroDecimation,
    #[error("torque schedule does not cover [{t_start}, {t_end}]: {reason}")]
    ScheduleCoverage {
        t_start: f64,
        t_end: f64,
        reason: String,
    },
    #[error("integrator step {step} failed: {source}")]
    StepFailed {
        step: u64,
        #[source]
        source: SolverError,
    },
}

/// Applied moment as a function of time, in the body frame.
#[derive(Debug, Clone, PartialEq)]
pub enum TorqueSchedule {
    Zero,
    Constant(Vector3<f64>),
    /// Per-axis `amplitude_i * sin(2 pi frequency_hz_i * t + phase_i)`.
    Sinusoidal {
        amplitude: Vector3<f64>,
        frequency_hz: Vector3<f64>,
        phase: Vector3<f64>,
    },
    /// Piecewise-constant table: the value at `times[i]` holds on
    /// `[times[i], times[i+1])`. The table must bracket the whole horizon.
    Tabulated {
        times: Vec<f64>,
        torques: Vec<Vector3<f64>>,
    },
}

impl TorqueSchedule {
    /// Torque at time `t` (zero-order hold for tabulated schedules).
    pub fn sample(&self, t: f64) -> Vector3<f64> {
        match self {
            TorqueSchedule::Zero => Vector3::zeros(),
            TorqueSchedule::Constant(u) => *u,
            TorqueSchedule::Sinusoidal {
                amplitude,
                frequency_hz,
                phase,
            } => {
                let two_pi = 2.0 * std::f64::consts::PI;
                Vector3::new(
                    amplitude.x * (two_pi * frequency_hz.x * t + phase.x).sin(),
                    amplitude.y * (two_pi * frequency_hz.y * t + phase.y).sin(),
                    amplitude.z * (two_pi * frequency_hz.z * t + phase.z).sin(),
                )
            }
            TorqueSchedule::Tabulated { times, torques } => {
                let idx = times.partition_point(|&ti| ti <= t).saturating_sub(1);
                torques[idx.min(torques.len() - 1)]
            }
        }
    }

    /// Checks the schedule is usable over `[t_start, t_end]`.
    pub fn validate(&self, t_start: f64, t_end: f64) -> Result<(), IntegratorError> {
        let fail = |reason: String| IntegratorError::ScheduleCoverage {
            t_start,
            t_end,
            reason,
        };
        if let TorqueSchedule::Tabulated { times, torques } = self {
            if times.is_empty() {
                return Err(fail("table is empty".to_string()));
            }
            if times.len() != torques.len() {
                return Err(fail(format!(
                    "{} times but {} torque samples",
                    times.len(),
                    torques.len()
                )));
            }
            if times.windows(2).any(|p| !(p[0] < p[1])) {
                return Err(fail("times must be strictly increasing".to_string()));
            }
            if times[0] > t_start {
                return Err(fail(format!("first sample at t = {}", times[0])));
            }
            if *times.last().unwrap() < t_end {
                return Err(fail(format!(
                    "last sample at t = {}",
                    times.last().unwrap()
                )));
            }
        }
        Ok(())
    }
}

/// One integrator step together with its solver statistics.
#[derive(Debug, Clone, Copy)]
pub struct StepRecord {
    pub state: AttitudeState,
    pub newton_iterations: u32,
    pub newton_residual: f64,
    /// The incremental rotation carrying the previous attitude to this one;
    /// `state.r == previous.r * increment` to roundoff.
    pub increment: RotationMatrix,
}

/// A propagated trajectory: retained step records plus run metadata.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub h: f64,
    pub n_steps: u64,
    /// Storage decimation: every `decimation`-th step is retained, plus the
    /// initial and final states.
    pub decimation: u64,
    pub records: Vec<StepRecord>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Step index of record `i` (accounts for decimation).
    pub fn step_index(&self, i: usize) -> u64 {
        if i + 1 == self.records.len() {
            self.n_steps
        } else {
            i as u64 * self.decimation
        }
    }

    pub fn final_state(&self) -> &AttitudeState {
        &self.records.last().expect("trajectory is never empty").state
    }
}

/// Advances one step: solves for the incremental rotation, rotates the
/// attitude, and transports the momentum with the torque impulse `h * u`.
pub fn step(
    state: &AttitudeState,
    torque: Vector3<f64>,
    h: f64,
    inertia: &InertiaPair,
    opts: &SolverOptions,
) -> Result<StepRecord, SolverError> {
    let sol = newton_solve(inertia.jd(), h, state.pi, opts)?;
    let r_next = state.r * sol.rotation;
    let pi_next = sol.rotation.transpose() * state.pi + h * torque;
    Ok(StepRecord {
        state: AttitudeState {
            r: r_next,
            pi: pi_next,
            t: state.t + h,
        },
        newton_iterations: sol.iterations,
        newton_residual: sol.residual_norm,
        increment: sol.rotation,
    })
}

/// Propagates `n_steps` steps from `initial`, retaining every state.
pub fn propagate(
    initial: &AttitudeState,
    schedule: &TorqueSchedule,
    h: f64,
    n_steps: u64,
    inertia: &InertiaPair,
    opts: &SolverOptions,
) -> Result<Trajectory, IntegratorError> {
    propagate_decimated(initial, schedule, h, n_steps, inertia, opts, 1)
}

/// Propagates with storage decimation for long runs. Record 0 is always the
/// initial state and the final state is always retained; in between, every
/// `decimation`-th step is kept. The dynamics are identical regardless of
/// the decimation factor.
pub fn propagate_decimated(
    initial: &AttitudeState,
    schedule: &TorqueSchedule,
    h: f64,
    n_steps: u64,
    inertia: &InertiaPair,
    opts: &SolverOptions,
    decimation: u64,
) -> Result<Trajectory, IntegratorError> {
    if !(h > 0.0) {
        return Err(IntegratorError::NonPositiveStep { h });
    }
    if n_steps == 0 {
        return Err(IntegratorError::EmptyHorizon);
    }
    if decimation == 0 {
        return Err(IntegratorError::ZeroDecimation);
    }
    let t0 = initial.t;
    schedule.validate(t0, t0 + n_steps as f64 * h)?;

    let mut records = Vec::with_capacity((n_steps / decimation + 2) as usize);
    records.push(StepRecord {
        state: *initial,
        newton_iterations: 0,
        newton_residual: 0.0,
        increment: RotationMatrix::identity(),
    });
    let mut current = *initial;
    for k in 0..n_steps {
        // Torque sampled at the exact grid time; stored times are also
        // recomputed from the grid so they do not accumulate roundoff.
        let u = schedule.sample(t0 + k as f64 * h);
        let mut record =
            step(&current, u, h, inertia, opts).map_err(|source| IntegratorError::StepFailed {
                step: k,
                source,
            })?;
        record.state.t = t0 + (k + 1) as f64 * h;
        current = record.state;
        if (k + 1) % decimation == 0 || k + 1 == n_steps {
            records.push(record);
        }
    }
    Ok(Trajectory {
        h,
        n_steps,
        decimation,
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rigid_body::momentum_from_velocity;

    fn tumbling_body() -> InertiaPair {
        InertiaPair::from_principal_moments(2.5, 2.0, 1.5).unwrap()
    }

    fn tumbling_state() -> AttitudeState {
        let inertia = tumbling_body();
        AttitudeState::from_velocity(
            RotationMatrix::identity(),
            inertia.j(),
            Vector3::new(1.0, 2.0, 3.0),
            0.0,
        )
    }

    #[test]
    fn rest_stays_at_rest() {
        let inertia = tumbling_body();
        let state = AttitudeState::new(RotationMatrix::identity(), Vector3::zeros(), 0.0);
        let rec = step(
            &state,
            Vector3::zeros(),
            0.01,
            &inertia,
            &SolverOptions::default(),
        )
        .unwrap();
        assert_eq!(rec.state.r.matrix(), state.r.matrix());
        assert_eq!(rec.state.pi, Vector3::zeros());
        assert!(rec.newton_iterations <= 1);
    }

    #[test]
    fn free_step_preserves_momentum_norm() {
        let inertia = tumbling_body();
        let mut state = tumbling_state();
        let pi0_norm = state.pi.norm();
        for _ in 0..100 {
            state = step(
                &state,
                Vector3::zeros(),
                0.01,
                &inertia,
                &SolverOptions::default(),
            )
            .unwrap()
            .state;
            assert!((state.pi.norm() - pi0_norm).abs() <= 1e-13 * pi0_norm);
        }
    }

    #[test]
    fn free_run_conserves_spatial_momentum() {
        let inertia = tumbling_body();
        let initial = tumbling_state();
        let spatial0 = initial.spatial_momentum();
        let traj = propagate(
            &initial,
            &TorqueSchedule::Zero,
            0.01,
            10_000,
            &inertia,
            &SolverOptions::default(),
        )
        .unwrap();
        let worst = traj
            .records
            .iter()
            .map(|r| (r.state.spatial_momentum() - spatial0).norm())
            .fold(0.0, f64::max);
        assert!(worst <= 1e-12 * spatial0.norm(), "drift {worst:.3e}");
    }

    #[test]
    fn record_chain_is_consistent() {
        let inertia = tumbling_body();
        let traj = propagate(
            &tumbling_state(),
            &TorqueSchedule::Zero,
            0.01,
            50,
            &inertia,
            &SolverOptions::default(),
        )
        .unwrap();
        assert_eq!(traj.len(), 51);
        for pair in traj.records.windows(2) {
            let rebuilt = pair[0].state.r * pair[1].increment;
            assert!((rebuilt.matrix() - pair[1].state.r.matrix()).norm() <= 1e-14);
        }
    }

    #[test]
    fn single_step_and_unit_propagation_agree() {
        let inertia = tumbling_body();
        let initial = tumbling_state();
        let opts = SolverOptions::default();
        let direct = step(&initial, Vector3::zeros(), 0.01, &inertia, &opts).unwrap();
        let traj = propagate(&initial, &TorqueSchedule::Zero, 0.01, 1, &inertia, &opts).unwrap();
        assert_eq!(traj.len(), 2);
        assert_eq!(traj.records[1].state.r.matrix(), direct.state.r.matrix());
        assert_eq!(traj.records[1].state.pi, direct.state.pi);
        assert_eq!(traj.records[1].state.t, direct.state.t);
    }

    #[test]
    fn constant_torque_applies_body_frame_impulse() {
        let inertia = tumbling_body();
        let state = AttitudeState::new(RotationMatrix::identity(), Vector3::zeros(), 0.0);
        let u = Vector3::new(0.5, -0.25, 1.0);
        let rec = step(&state, u, 0.01, &inertia, &SolverOptions::default()).unwrap();
        // From rest F = I, so the update is exactly the impulse h*u.
        assert_eq!(rec.state.pi, 0.01 * u);
    }

    #[test]
    fn decimation_preserves_endpoints_and_dynamics() {
        let inertia = tumbling_body();
        let initial = tumbling_state();
        let opts = SolverOptions::default();
        let dense = propagate(&initial, &TorqueSchedule::Zero, 0.01, 100, &inertia, &opts).unwrap();
        let thin = propagate_decimated(
            &initial,
            &TorqueSchedule::Zero,
            0.01,
            100,
            &inertia,
            &opts,
            7,
        )
        .unwrap();
        assert_eq!(thin.step_index(0), 0);
        assert_eq!(thin.step_index(1), 7);
        assert_eq!(thin.step_index(thin.len() - 1), 100);
        assert_eq!(
            thin.final_state().r.matrix(),
            dense.final_state().r.matrix()
        );
        assert_eq!(thin.final_state().pi, dense.final_state().pi);
    }

    #[test]
    fn tabulated_schedule_zero_order_hold() {
        let schedule = TorqueSchedule::Tabulated {
            times: vec![0.0, 1.0, 2.0],
            torques: vec![
                Vector3::new(1.0, 0.0, 0.0),
                Vector3::new(0.0, 1.0, 0.0),
                Vector3::new(0.0, 0.0, 1.0),
            ],
        };
        assert_eq!(schedule.sample(0.0), Vector3::new(1.0, 0.0, 0.0));
        assert_eq!(schedule.sample(0.999), Vector3::new(1.0, 0.0, 0.0));
        assert_eq!(schedule.sample(1.0), Vector3::new(0.0, 1.0, 0.0));
        assert_eq!(schedule.sample(1.5), Vector3::new(0.0, 1.0, 0.0));
        assert_eq!(schedule.sample(2.0), Vector3::new(0.0, 0.0, 1.0));
    }

    #[test]
    fn tabulated_schedule_must_cover_horizon() {
        let schedule = TorqueSchedule::Tabulated {
            times: vec![0.0, 0.5],
            torques: vec![Vector3::zeros(), Vector3::zeros()],
        };
        assert!(schedule.validate(0.0, 0.5).is_ok());
        assert!(matches!(
            schedule.validate(0.0, 1.0),
            Err(IntegratorError::ScheduleCoverage { .. })
        ));
        let inertia = tumbling_body();
        let err = propagate(
            &tumbling_state(),
            &schedule,
            0.01,
            200,
            &inertia,
            &SolverOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, IntegratorError::ScheduleCoverage { .. }));
    }

    #[test]
    fn sinusoidal_schedule_samples_per_axis() {
        let schedule = TorqueSchedule::Sinusoidal {
            amplitude: Vector3::new(2.0, 0.0, 1.0),
            frequency_hz: Vector3::new(0.25, 1.0, 0.5),
            phase: Vector3::new(0.0, 0.0, std::f64::consts::FRAC_PI_2),
        };
        let u = schedule.sample(1.0);
        // sin(pi/2) = 1, amplitude 2 on x; cos(pi) = -1 on z via the phase.
        assert!((u.x - 2.0).abs() < 1e-12);
        assert_eq!(u.y, 0.0);
        assert!((u.z - 1.0 * (std::f64::consts::PI + std::f64::consts::FRAC_PI_2).sin()).abs() < 1e-12);
    }

    #[test]
    fn propagate_rejects_bad_arguments() {
        let inertia = tumbling_body();
        let state = tumbling_state();
        let opts = SolverOptions::default();
        assert!(matches!(
            propagate(&state, &TorqueSchedule::Zero, 0.0, 10, &inertia, &opts),
            Err(IntegratorError::NonPositiveStep { .. })
        ));
        assert!(matches!(
            propagate(&state, &TorqueSchedule::Zero, 0.01, 0, &inertia, &opts),
            Err(IntegratorError::EmptyHorizon)
        ));
        assert!(matches!(
            propagate_decimated(&state, &TorqueSchedule::Zero, 0.01, 10, &inertia, &opts, 0),
            Err(IntegratorError::ZeroDecimation)
        ));
    }

    #[test]
    fn solver_failure_reports_step_index() {
        let inertia = tumbling_body();
        // Start from an infeasible momentum so the very first solve fails.
        let state = AttitudeState {
            r: RotationMatrix::identity(),
            pi: Vector3::new(1e7, 0.0, 0.0),
            t: 0.0,
        };
        let err = propagate(
            &state,
            &TorqueSchedule::Zero,
            0.01,
            10,
            &inertia,
            &SolverOptions::default(),
        )
        .unwrap_err();
        match err {
            IntegratorError::StepFailed { step, .. } => assert_eq!(step, 0),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn forced_momentum_update_formula() {
        // Pi_{k+1} - F^T Pi_k must equal h*u exactly.
        let inertia = tumbling_body();
        let state = tumbling_state();
        let u = Vector3::new(0.3, 0.1, -0.2);
        let h = 0.01;
        let rec = step(&state, u, h, &inertia, &SolverOptions::default()).unwrap();
        let transported = rec.increment.transpose() * state.pi;
        assert!((rec.state.pi - transported - h * u).norm() <= 1e-15 * state.pi.norm());
    }

    #[test]
    fn momentum_from_velocity_matches_state_constructor() {
        let inertia = tumbling_body();
        let omega = Vector3::new(1.0, 2.0, 3.0);
        let state = AttitudeState::from_velocity(
            RotationMatrix::identity(),
            inertia.j(),
            omega,
            0.0,
        );
        assert_eq!(state.pi, momentum_from_velocity(inertia.j(), omega));
    }
}

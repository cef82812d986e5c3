//! Simulation configuration: JSON schema, defaults, and validation.
//!
//! A minimal document needs only the inertia, one of `omega0`/`pi0`, the
//! step `h`, and the step count:
//!
//! ```json
//! {
//!   "inertia": [2.5, 2.0, 1.5],
//!   "omega0": [1.0, 2.0, 3.0],
//!   "h": 0.01,
//!   "steps": 1000
//! }
//! ```
//!
//! Optional keys: `attitude0` (`"identity"`, a 3x3 row-major matrix, or
//! `{"axis": [...], "angle": ...}`), `pi0` instead of `omega0`, `torque`
//! (`{"kind": "zero" | "constant" | "sinusoidal" | "tabulated", ...}`),
//! `solver` (`alpha`, `tol`, `max_iters`, `w0_strategy`), and `output`
//! (`decimation`). Unknown keys are rejected.

use nalgebra::{Matrix3, Vector3};
use serde::Deserialize;
use thiserror::Error;

use crate::integrator::TorqueSchedule;
use crate::rigid_body::{momentum_from_velocity, InertiaError, InertiaPair};
use crate::so3::{exp_so3, RotationMatrix, So3Error};
use crate::solver::{InitialGuess, SolverOptions};

/// Loose ingest tolerance for user-supplied attitudes; the matrix is
/// tightened by one polar projection after passing this gate.
pub const ATTITUDE_INGEST_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum ConfigError {
    /// The document does not match the schema.
    #[error("config schema error at {path}: {message}")]
    Schema { path: String, message: String },
    /// The document is well-formed but violates an invariant.
    #[error("config invalid: {message}")]
    Invalid { message: String },
}

impl From<InertiaError> for ConfigError {
    fn from(e: InertiaError) -> Self {
        ConfigError::Invalid {
            message: format!("inertia: {e}"),
        }
    }
}

impl From<So3Error> for ConfigError {
    fn from(e: So3Error) -> Self {
        ConfigError::Invalid {
            message: format!("attitude0: {e}"),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum InertiaSpec {
    /// Three principal moments, placed on the diagonal.
    Principal([f64; 3]),
    /// Full symmetric 3x3 matrix, row-major.
    Full([[f64; 3]; 3]),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum AttitudeSpec {
    /// The string `"identity"`.
    Named(String),
    /// Row-major 3x3 rotation matrix.
    Matrix([[f64; 3]; 3]),
    /// Axis-angle; the axis need not be normalized.
    AxisAngle { axis: [f64; 3], angle: f64 },
}

impl Default for AttitudeSpec {
    fn default() -> Self {
        AttitudeSpec::Named("identity".to_string())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TorqueSpec {
    Zero,
    Constant {
        value: [f64; 3],
    },
    Sinusoidal {
        amplitude: [f64; 3],
        frequency_hz: [f64; 3],
        #[serde(default)]
        phase: [f64; 3],
    },
    Tabulated {
        times: Vec<f64>,
        torques: Vec<[f64; 3]>,
    },
}

impl Default for TorqueSpec {
    fn default() -> Self {
        TorqueSpec::Zero
    }
}

fn default_alpha() -> f64 {
    1.0
}

fn default_tol() -> f64 {
    1e-12
}

fn default_max_iters() -> u32 {
    50
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iters")]
    pub max_iters: u32,
    #[serde(default)]
    pub w0_strategy: GuessSpec,
}

impl Default for SolverSpec {
    fn default() -> Self {
        Self {
            alpha: default_alpha(),
            tol: default_tol(),
            max_iters: default_max_iters(),
            w0_strategy: GuessSpec::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GuessSpec {
    Zero,
    #[default]
    MomentumGuess,
}

impl From<GuessSpec> for InitialGuess {
    fn from(g: GuessSpec) -> Self {
        match g {
            GuessSpec::Zero => InitialGuess::Zero,
            GuessSpec::MomentumGuess => InitialGuess::MomentumGuess,
        }
    }
}

fn default_decimation() -> u64 {
    1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_decimation")]
    pub decimation: u64,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            decimation: default_decimation(),
        }
    }
}

/// A raw, schema-validated configuration document.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub inertia: InertiaSpec,
    #[serde(default)]
    pub attitude0: AttitudeSpec,
    #[serde(default)]
    pub omega0: Option<[f64; 3]>,
    #[serde(default)]
    pub pi0: Option<[f64; 3]>,
    pub h: f64,
    pub steps: u64,
    #[serde(default)]
    pub torque: TorqueSpec,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

/// A fully validated configuration with every default applied.
#[derive(Debug, Clone)]
pub struct ResolvedConfig {
    pub inertia: InertiaPair,
    pub r0: RotationMatrix,
    pub pi0: Vector3<f64>,
    pub h: f64,
    pub steps: u64,
    pub schedule: TorqueSchedule,
    pub solver: SolverOptions,
    pub decimation: u64,
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<ResolvedConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: SimConfig = serde_path_to_error::deserialize(de).map_err(|e| ConfigError::Schema {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    raw.resolve()
}

fn vec3(a: [f64; 3]) -> Vector3<f64> {
    Vector3::new(a[0], a[1], a[2])
}

fn mat3(rows: &[[f64; 3]; 3]) -> Matrix3<f64> {
    Matrix3::from_row_slice(&[
        rows[0][0], rows[0][1], rows[0][2], rows[1][0], rows[1][1], rows[1][2], rows[2][0],
        rows[2][1], rows[2][2],
    ])
}

fn require_finite(name: &str, values: &[f64]) -> Result<(), ConfigError> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(ConfigError::Invalid {
            message: format!("{name} must be finite"),
        });
    }
    Ok(())
}

impl SimConfig {
    /// Validates every invariant and applies defaults.
    pub fn resolve(&self) -> Result<ResolvedConfig, ConfigError> {
        if !(self.h > 0.0) {
            return Err(ConfigError::Invalid {
                message: "h must be positive".to_string(),
            });
        }
        if !self.h.is_finite() {
            return Err(ConfigError::Invalid {
                message: "h must be finite".to_string(),
            });
        }
        if self.steps == 0 {
            return Err(ConfigError::Invalid {
                message: "steps must be at least 1".to_string(),
            });
        }
        if self.output.decimation == 0 {
            return Err(ConfigError::Invalid {
                message: "output.decimation must be at least 1".to_string(),
            });
        }

        let j = match &self.inertia {
            InertiaSpec::Principal(m) => {
                require_finite("inertia", m)?;
                Matrix3::from_diagonal(&vec3(*m))
            }
            InertiaSpec::Full(rows) => {
                for row in rows {
                    require_finite("inertia", row)?;
                }
                mat3(rows)
            }
        };
        let inertia = InertiaPair::from_inertia(&j)?;

        let r0 = match &self.attitude0 {
            AttitudeSpec::Named(name) if name == "identity" => RotationMatrix::identity(),
            AttitudeSpec::Named(name) => {
                return Err(ConfigError::Invalid {
                    message: format!("attitude0: unknown name {name:?} (expected \"identity\")"),
                });
            }
            AttitudeSpec::Matrix(rows) => {
                for row in rows {
                    require_finite("attitude0", row)?;
                }
                RotationMatrix::from_matrix_projected(&mat3(rows), ATTITUDE_INGEST_TOL)?
            }
            AttitudeSpec::AxisAngle { axis, angle } => {
                require_finite("attitude0.axis", axis)?;
                require_finite("attitude0.angle", &[*angle])?;
                let axis = vec3(*axis);
                if axis.norm() == 0.0 {
                    return Err(ConfigError::Invalid {
                        message: "attitude0.axis must be nonzero".to_string(),
                    });
                }
                exp_so3(axis.normalize() * *angle)
            }
        };

        let pi0 = match (&self.omega0, &self.pi0) {
            (Some(omega), None) => {
                require_finite("omega0", omega)?;
                momentum_from_velocity(inertia.j(), vec3(*omega))
            }
            (None, Some(pi)) => {
                require_finite("pi0", pi)?;
                vec3(*pi)
            }
            (Some(_), Some(_)) => {
                return Err(ConfigError::Invalid {
                    message: "exactly one of omega0 and pi0 must be given, got both".to_string(),
                });
            }
            (None, None) => {
                return Err(ConfigError::Invalid {
                    message: "exactly one of omega0 and pi0 must be given, got neither"
                        .to_string(),
                });
            }
        };

        let schedule = match &self.torque {
            TorqueSpec::Zero => TorqueSchedule::Zero,
            TorqueSpec::Constant { value } => {
                require_finite("torque.value", value)?;
                TorqueSchedule::Constant(vec3(*value))
            }
            TorqueSpec::Sinusoidal {
                amplitude,
                frequency_hz,
                phase,
            } => {
                require_finite("torque.amplitude", amplitude)?;
                require_finite("torque.frequency_hz", frequency_hz)?;
                require_finite("torque.phase", phase)?;
                TorqueSchedule::Sinusoidal {
                    amplitude: vec3(*amplitude),
                    frequency_hz: vec3(*frequency_hz),
                    phase: vec3(*phase),
                }
            }
            TorqueSpec::Tabulated { times, torques } => {
                require_finite("torque.times", times)?;
                for u in torques {
                    require_finite("torque.torques", u)?;
                }
                let schedule = TorqueSchedule::Tabulated {
                    times: times.clone(),
                    torques: torques.iter().map(|u| vec3(*u)).collect(),
                };
                schedule
                    .validate(0.0, self.steps as f64 * self.h)
                    .map_err(|e| ConfigError::Invalid {
                        message: e.to_string(),
                    })?;
                schedule
            }
        };

        let solver = SolverOptions {
            alpha: self.solver.alpha,
            tol: self.solver.tol,
            max_iters: self.solver.max_iters,
            w0_strategy: self.solver.w0_strategy.into(),
        };
        solver.validate().map_err(|e| ConfigError::Invalid {
            message: format!("solver: {e}"),
        })?;

        Ok(ResolvedConfig {
            inertia,
            r0,
            pi0,
            h: self.h,
            steps: self.steps,
            schedule,
            solver,
            decimation: self.output.decimation,
        })
    }
}

/// Parses a list of configurations (for sweep runs).
pub fn parse_config_list(text: &str) -> Result<Vec<ResolvedConfig>, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: Vec<SimConfig> =
        serde_path_to_error::deserialize(de).map_err(|e| ConfigError::Schema {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
    raw.iter().map(SimConfig::resolve).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_applies_defaults() {
        let cfg = parse_config(
            r#"{"inertia": [2.5, 2.0, 1.5], "omega0": [1, 2, 3], "h": 0.01, "steps": 100}"#,
        )
        .unwrap();
        assert_eq!(cfg.solver.alpha, 1.0);
        assert_eq!(cfg.solver.tol, 1e-12);
        assert_eq!(cfg.solver.max_iters, 50);
        assert_eq!(cfg.solver.w0_strategy, InitialGuess::MomentumGuess);
        assert_eq!(cfg.schedule, TorqueSchedule::Zero);
        assert_eq!(cfg.decimation, 1);
        assert_eq!(cfg.r0.matrix(), &Matrix3::identity());
    }

    #[test]
    fn zero_step_is_rejected_with_message() {
        let err = parse_config(
            r#"{"inertia": [2.5, 2.0, 1.5], "omega0": [1, 2, 3], "h": 0.0, "steps": 100}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("h must be positive"), "{err}");
    }

    #[test]
    fn omega_is_converted_to_momentum() {
        let cfg = parse_config(
            r#"{"inertia": [2.5, 2.0, 1.5], "omega0": [1, 2, 3], "h": 0.01, "steps": 1}"#,
        )
        .unwrap();
        assert_eq!(cfg.pi0, Vector3::new(2.5, 4.0, 4.5));
    }

    #[test]
    fn momentum_passes_through() {
        let cfg = parse_config(
            r#"{"inertia": [2.5, 2.0, 1.5], "pi0": [2.5, 4.0, 4.5], "h": 0.01, "steps": 1}"#,
        )
        .unwrap();
        assert_eq!(cfg.pi0, Vector3::new(2.5, 4.0, 4.5));
    }

    #[test]
    fn both_initial_conditions_rejected() {
        let err = parse_config(
            r#"{"inertia": [1, 1, 1], "omega0": [1, 0, 0], "pi0": [1, 0, 0], "h": 0.01, "steps": 1}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("got both"));
    }

    #[test]
    fn missing_initial_condition_rejected() {
        let err =
            parse_config(r#"{"inertia": [1, 1, 1], "h": 0.01, "steps": 1}"#).unwrap_err();
        assert!(err.to_string().contains("got neither"));
    }

    #[test]
    fn unknown_field_reports_schema_error() {
        let err = parse_config(
            r#"{"inertia": [1, 1, 1], "omega0": [1, 0, 0], "h": 0.01, "steps": 1, "bogus": 3}"#,
        )
        .unwrap_err();
        assert!(matches!(err, ConfigError::Schema { .. }), "{err}");
    }

    #[test]
    fn full_inertia_matrix_accepted() {
        let cfg = parse_config(
            r#"{"inertia": [[2.5, 0, 0], [0, 2.0, 0], [0, 0, 1.5]],
                "omega0": [1, 2, 3], "h": 0.01, "steps": 1}"#,
        )
        .unwrap();
        assert_eq!(cfg.inertia.j()[(0, 0)], 2.5);
    }

    #[test]
    fn invalid_inertia_rejected() {
        // Triangle-inequality violation.
        let err = parse_config(
            r#"{"inertia": [1, 1, 3], "omega0": [1, 0, 0], "h": 0.01, "steps": 1}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("inertia"));
    }

    #[test]
    fn axis_angle_attitude() {
        let cfg = parse_config(
            r#"{"inertia": [1, 1, 1],
                "attitude0": {"axis": [0, 0, 2], "angle": 1.5707963267948966},
                "omega0": [0, 0, 0], "h": 0.01, "steps": 1}"#,
        )
        .unwrap();
        let r = cfg.r0.matrix();
        assert!((r[(0, 1)] + 1.0).abs() < 1e-12); // quarter turn about z
    }

    #[test]
    fn near_rotation_matrix_is_projected() {
        // Slightly perturbed identity passes the loose gate and comes out
        // exactly orthogonal after projection.
        let cfg = parse_config(
            r#"{"inertia": [1, 1, 1],
                "attitude0": [[1.0, 1e-8, 0], [0, 1.0, 0], [0, 0, 1.0]],
                "omega0": [0, 0, 0], "h": 0.01, "steps": 1}"#,
        )
        .unwrap();
        let check = crate::so3::validate_rotation(cfg.r0.matrix(), 1e-12);
        assert!(check.ok);
    }

    #[test]
    fn far_from_rotation_rejected() {
        let err = parse_config(
            r#"{"inertia": [1, 1, 1],
                "attitude0": [[1.0, 0.1, 0], [0, 1.0, 0], [0, 0, 1.0]],
                "omega0": [0, 0, 0], "h": 0.01, "steps": 1}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("attitude0"));
    }

    #[test]
    fn tabulated_torque_coverage_checked_at_parse() {
        let err = parse_config(
            r#"{"inertia": [1, 1, 1], "omega0": [0, 0, 0], "h": 0.1, "steps": 100,
                "torque": {"kind": "tabulated", "times": [0.0, 1.0],
                           "torques": [[0,0,0],[0,0,0]]}}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("does not cover"));
    }

    #[test]
    fn solver_spec_validation_propagates() {
        let err = parse_config(
            r#"{"inertia": [1, 1, 1], "omega0": [0, 0, 0], "h": 0.1, "steps": 1,
                "solver": {"alpha": 2.0}}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("alpha"));
    }

    #[test]
    fn config_list_parses() {
        let cfgs = parse_config_list(
            r#"[{"inertia": [1, 1, 1], "omega0": [0, 0, 0], "h": 0.1, "steps": 1},
                {"inertia": [2, 2, 2], "omega0": [1, 0, 0], "h": 0.1, "steps": 2}]"#,
        )
        .unwrap();
        assert_eq!(cfgs.len(), 2);
        assert_eq!(cfgs[1].steps, 2);
    }
}

//! Rigid-body model: the inertia tensor, its nonstandard companion, kinetic
//! energy, and the maps between angular velocity and angular momentum.
//!
//! The companion tensor `Jd = (1/2) tr(J) I - J` shows up throughout the
//! discrete attitude equations; the pair is kept consistent by
//! [`InertiaPair`]. `Jd` is positive semidefinite exactly when the
//! eigenvalues of `J` satisfy the triangle inequalities, which is the usual
//! physical-realizability condition on a moment of inertia.

use nalgebra::{Matrix3, Vector3};
use thiserror::Error;

use crate::so3::{validate_rotation, RotationMatrix, ROTATION_TOL};

/// Symmetry defect above which an inertia tensor is rejected.
pub const SYMMETRY_DEFECT_LIMIT: f64 = 1e-9;

/// Most negative eigenvalue tolerated from the companion tensor.
pub const COMPANION_EIGENVALUE_FLOOR: f64 = -1e-12;

/// Condition-number cap for inverting `J` in [`velocity_from_momentum`].
pub const MAX_INERTIA_CONDITION: f64 = 1e12;

#[derive(Debug, Error)]
pub enum InertiaError {
    #[error("inertia tensor is not symmetric: defect {defect:.3e}")]
    NotSymmetric { defect: f64 },
    #[error("inertia tensor is not positive definite: min eigenvalue {min_eigenvalue:.3e}")]
    NotPositiveDefinite { min_eigenvalue: f64 },
    /// The principal moments violate the triangle inequality, so the body
    /// is not physically realizable.
    #[error(
        "inertia eigenvalues violate the triangle inequality: companion tensor \
         has eigenvalue {min_companion_eigenvalue:.3e}"
    )]
    TriangleInequality { min_companion_eigenvalue: f64 },
    #[error("inertia tensor is near-singular: condition number {condition:.3e}")]
    IllConditioned { condition: f64 },
}

fn symmetry_defect(m: &Matrix3<f64>) -> f64 {
    (m - m.transpose()).norm()
}

fn symmetrize(m: &Matrix3<f64>) -> Matrix3<f64> {
    0.5 * (m + m.transpose())
}

/// Companion tensor from the body inertia: `Jd = (1/2) tr(J) I - J`.
///
/// Rejects non-symmetric input and inertias whose companion tensor has an
/// eigenvalue below [`COMPANION_EIGENVALUE_FLOOR`] (no mass distribution
/// realizes them). The input is symmetrized before use so the result is
/// exactly symmetric.
pub fn jd_from_j(j: &Matrix3<f64>) -> Result<Matrix3<f64>, InertiaError> {
    let defect = symmetry_defect(j);
    if defect > SYMMETRY_DEFECT_LIMIT {
        return Err(InertiaError::NotSymmetric { defect });
    }
    let j = symmetrize(j);
    let jd = Matrix3::from_diagonal_element(0.5 * j.trace()) - j;
    let min_eig = nalgebra::SymmetricEigen::new(jd)
        .eigenvalues
        .min();
    if min_eig < COMPANION_EIGENVALUE_FLOOR {
        return Err(InertiaError::TriangleInequality {
            min_companion_eigenvalue: min_eig,
        });
    }
    Ok(jd)
}

/// Body inertia from the companion tensor: `J = tr(Jd) I - Jd`.
pub fn j_from_jd(jd: &Matrix3<f64>) -> Result<Matrix3<f64>, InertiaError> {
    let defect = symmetry_defect(jd);
    if defect > SYMMETRY_DEFECT_LIMIT {
        return Err(InertiaError::NotSymmetric { defect });
    }
    let jd = symmetrize(jd);
    Ok(Matrix3::from_diagonal_element(jd.trace()) - jd)
}

/// Rotational kinetic energy `(1/2) w^T J w` in joules.
pub fn kinetic_energy(j: &Matrix3<f64>, omega: Vector3<f64>) -> f64 {
    0.5 * omega.dot(&(j * omega))
}

/// Body-frame angular momentum from angular velocity.
pub fn momentum_from_velocity(j: &Matrix3<f64>, omega: Vector3<f64>) -> Vector3<f64> {
    j * omega
}

/// Angular velocity from body-frame angular momentum.
///
/// Rejects inertias with condition number above [`MAX_INERTIA_CONDITION`]
/// or with a non-positive eigenvalue.
pub fn velocity_from_momentum(
    j: &Matrix3<f64>,
    pi: Vector3<f64>,
) -> Result<Vector3<f64>, InertiaError> {
    let eig = nalgebra::SymmetricEigen::new(symmetrize(j)).eigenvalues;
    let (min_eig, max_eig) = (eig.min(), eig.max());
    if min_eig <= 0.0 {
        return Err(InertiaError::NotPositiveDefinite {
            min_eigenvalue: min_eig,
        });
    }
    let condition = max_eig / min_eig;
    if condition > MAX_INERTIA_CONDITION {
        return Err(InertiaError::IllConditioned { condition });
    }
    Ok(j.lu().solve(&pi).expect("conditioning already checked"))
}

/// A body inertia and its companion tensor, kept mutually consistent.
///
/// Both matrices are stored exactly symmetric; downstream products like
/// `F*Jd - Jd*F^T` are then antisymmetric to the last bit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InertiaPair {
    j: Matrix3<f64>,
    jd: Matrix3<f64>,
}

impl InertiaPair {
    /// Validates and adopts a body inertia tensor.
    ///
    /// Requires symmetry, positive definiteness, and the eigenvalue
    /// triangle inequality (equivalently, a positive-semidefinite
    /// companion tensor).
    pub fn from_inertia(j: &Matrix3<f64>) -> Result<Self, InertiaError> {
        let defect = symmetry_defect(j);
        if defect > SYMMETRY_DEFECT_LIMIT {
            return Err(InertiaError::NotSymmetric { defect });
        }
        let j = symmetrize(j);
        let min_eig = nalgebra::SymmetricEigen::new(j).eigenvalues.min();
        if min_eig <= 0.0 {
            return Err(InertiaError::NotPositiveDefinite {
                min_eigenvalue: min_eig,
            });
        }
        let jd = jd_from_j(&j)?;
        Ok(Self { j, jd })
    }

    /// Convenience constructor for a principal-axis body.
    pub fn from_principal_moments(a: f64, b: f64, c: f64) -> Result<Self, InertiaError> {
        Self::from_inertia(&Matrix3::from_diagonal(&Vector3::new(a, b, c)))
    }

    pub fn j(&self) -> &Matrix3<f64> {
        &self.j
    }

    pub fn jd(&self) -> &Matrix3<f64> {
        &self.jd
    }
}

/// Orientation and body-frame angular momentum at a time instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttitudeState {
    /// Body-to-inertial rotation.
    pub r: RotationMatrix,
    /// Body-frame angular momentum (kg m^2/s).
    pub pi: Vector3<f64>,
    /// Time (s).
    pub t: f64,
}

impl AttitudeState {
    pub fn new(r: RotationMatrix, pi: Vector3<f64>, t: f64) -> Self {
        debug_assert!(validate_rotation(r.matrix(), ROTATION_TOL).ok);
        Self { r, pi, t }
    }

    /// Builds a state from angular velocity instead of momentum.
    pub fn from_velocity(r: RotationMatrix, j: &Matrix3<f64>, omega: Vector3<f64>, t: f64) -> Self {
        Self::new(r, momentum_from_velocity(j, omega), t)
    }

    /// Spatial (inertial-frame) angular momentum `R * Pi`.
    pub fn spatial_momentum(&self) -> Vector3<f64> {
        self.r * self.pi
    }
}
